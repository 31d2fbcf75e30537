#pragma once

#include <array>
#include <functional>
#include <vector>

namespace odediscover::pareto {

struct ParetoCurvePoint {
    double lambda = 0.0;
    double reg_residual = 0.0;
    double sol_residual = 0.0;
    bool clamped = false;  // a residual was zero and got clamped before the log
};

/// Fills reg_residual and sol_residual for the given lambda.
using Evaluator = std::function<ParetoCurvePoint(double)>;

struct CornerResult {
    double lambda_corner = 0.0;
    bool no_corner = false;
    int evaluations = 0;
    std::vector<ParetoCurvePoint> trace;                // every evaluation, in order
    std::vector<std::array<double, 4>> brackets;         // working lambdas per iteration
};

/// Signed three-point (Menger) curvature; positive for a left turn.
double menger_curvature(double x1, double y1, double x2, double y2, double x3, double y3);

/// Golden-section corner search on the log-log curve (log sol, log reg).
/// Stops after max_evals evaluations or once (l4 - l1)/l4 < rel_width.
CornerResult corner_search(const Evaluator& evaluate, double lambda_min, double lambda_max, int max_evals = 30,
                           double rel_width = 0.01);

struct GammaSelection {
    double gamma = 0.0;
    bool no_corner = false;
    CornerResult search;
};

/// Corner search restricted to [0.1, 10] * gamma_exp; falls back to
/// gamma_exp when the curve has no corner there.
GammaSelection gamma_pareto(const Evaluator& evaluate, double gamma_exp, int max_evals = 30);

}  // namespace odediscover::pareto
