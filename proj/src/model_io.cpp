#include "rotornav/model_io.hpp"

#include <cstring>
#include <fstream>

#include "rotornav/errors.hpp"

namespace rotornav {

namespace {

constexpr std::uint32_t kMaxDim = 1u << 20;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) {
        if (pos_ + n > bytes_.size()) {
            throw ModelIoError(ModelIoError::Kind::Truncated, "stream truncated");
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

void put_matrix_row_major(std::vector<std::uint8_t>& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
    }
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const MnnNetwork& net) {
    net.validate();
    std::vector<std::uint8_t> out;
    put_u32(out, kModelMagic);
    put_u32(out, kModelFormatVersion);
    put_f64(out, net.gamma());
    put_u32(out, static_cast<std::uint32_t>(net.input_dim()));
    put_u32(out, static_cast<std::uint32_t>(net.layer_count()));
    for (const MnnLayer& layer : net.layers()) {
        put_u32(out, static_cast<std::uint32_t>(layer.in_dim()));
        put_u32(out, static_cast<std::uint32_t>(layer.out_dim()));
        put_u32(out, layer.activation == Activation::Tanh ? 0u : 1u);
        put_matrix_row_major(out, layer.W);
        put_matrix_row_major(out, layer.Q);
        for (Eigen::Index i = 0; i < layer.alpha.size(); ++i) put_f64(out, layer.alpha[i]);
    }
    return out;
}

MnnNetwork deserialize_model(const std::vector<std::uint8_t>& bytes) {
    Reader in(bytes);
    if (in.u32() != kModelMagic) {
        throw ModelIoError(ModelIoError::Kind::BadMagic, "not a model file");
    }
    const std::uint32_t version = in.u32();
    if (version != kModelFormatVersion) {
        throw ModelIoError(ModelIoError::Kind::VersionMismatch,
                           "unsupported format version " + std::to_string(version));
    }
    const double gamma = in.f64();
    const std::uint32_t input_dim = in.u32();
    const std::uint32_t layer_count = in.u32();
    if (layer_count == 0 || layer_count > 64) {
        throw ModelIoError(ModelIoError::Kind::DimensionMismatch, "implausible layer count");
    }

    std::vector<MnnLayer> layers;
    layers.reserve(layer_count);
    std::uint32_t expected_in = input_dim;
    for (std::uint32_t li = 0; li < layer_count; ++li) {
        const std::uint32_t in_dim = in.u32();
        const std::uint32_t out_dim = in.u32();
        const std::uint32_t act = in.u32();
        if (in_dim == 0 || out_dim == 0 || in_dim > kMaxDim || out_dim > kMaxDim) {
            throw ModelIoError(ModelIoError::Kind::DimensionMismatch, "implausible layer shape");
        }
        if (in_dim != expected_in) {
            throw ModelIoError(ModelIoError::Kind::DimensionMismatch,
                               "layer " + std::to_string(li) + " input dim " +
                                   std::to_string(in_dim) + " does not chain from " +
                                   std::to_string(expected_in));
        }
        if (act > 1) {
            throw ModelIoError(ModelIoError::Kind::InvalidValue, "unknown activation tag");
        }
        const std::size_t payload =
            8u * (static_cast<std::size_t>(out_dim) * in_dim +
                  static_cast<std::size_t>(out_dim) * out_dim + out_dim);
        if (in.remaining() < payload) {
            throw ModelIoError(ModelIoError::Kind::Truncated, "stream truncated inside layer " +
                                                                  std::to_string(li));
        }
        MnnLayer layer = MnnLayer::zeros(out_dim, in_dim,
                                         act == 0 ? Activation::Tanh : Activation::Linear);
        for (std::uint32_t r = 0; r < out_dim; ++r) {
            for (std::uint32_t c = 0; c < in_dim; ++c) layer.W(r, c) = in.f64();
        }
        for (std::uint32_t r = 0; r < out_dim; ++r) {
            for (std::uint32_t c = 0; c < out_dim; ++c) layer.Q(r, c) = in.f64();
        }
        for (std::uint32_t i = 0; i < out_dim; ++i) layer.alpha[i] = in.f64();
        layers.push_back(std::move(layer));
        expected_in = out_dim;
    }

    try {
        return MnnNetwork(std::move(layers), gamma);
    } catch (const Error& e) {
        throw ModelIoError(ModelIoError::Kind::InvalidValue, e.what());
    }
}

void save_model(const MnnNetwork& net, const std::filesystem::path& path) {
    const std::vector<std::uint8_t> bytes = serialize_model(net);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + path.string());
}

MnnNetwork load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace rotornav
