#include "rotornav/fixtures.hpp"

namespace rotornav {

std::vector<std::pair<std::string, TrajectoryPlan>> fixture_suite() {
    std::vector<std::pair<std::string, TrajectoryPlan>> suite;

    TrajectoryPlan hover;
    hover.kind = PlanKind::Hover;
    hover.duration_s = 60.0;
    hover.seed = 101;
    suite.emplace_back("hover", hover);

    TrajectoryPlan square;
    square.kind = PlanKind::Square;
    square.duration_s = 70.0;
    square.side_m = 2.0;
    square.speed_mps = 0.4;
    square.seed = 102;
    suite.emplace_back("square", square);

    TrajectoryPlan circle;
    circle.kind = PlanKind::Circle;
    circle.duration_s = 70.0;
    circle.radius_m = 2.0;
    circle.speed_mps = 0.5;
    circle.seed = 103;
    suite.emplace_back("circle", circle);

    TrajectoryPlan rnd1;
    rnd1.kind = PlanKind::RandomWaypoint;
    rnd1.duration_s = 60.0;
    rnd1.speed_mps = 0.5;
    rnd1.seed = 104;
    suite.emplace_back("random1", rnd1);

    TrajectoryPlan rnd2 = rnd1;
    rnd2.duration_s = 60.0;
    rnd2.seed = 105;
    suite.emplace_back("random2", rnd2);

    return suite;
}

std::vector<std::pair<std::string, TrajectoryPlan>> stress_suite() {
    std::vector<std::pair<std::string, TrajectoryPlan>> suite;

    TrajectoryPlan circle;
    circle.kind = PlanKind::Circle;
    circle.duration_s = 60.0;
    circle.radius_m = 30.0;
    circle.altitude_m = 15.0;
    circle.speed_mps = 4.0;
    circle.seed = 201;
    suite.emplace_back("stress_circle", circle);

    TrajectoryPlan square;
    square.kind = PlanKind::Square;
    square.duration_s = 60.0;
    square.side_m = 40.0;
    square.altitude_m = 12.0;
    square.speed_mps = 3.0;
    square.seed = 202;
    suite.emplace_back("stress_square", square);

    return suite;
}

}  // namespace rotornav
