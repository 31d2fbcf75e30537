#include "odediscover/pareto.hpp"

#include <cmath>
#include <sstream>

#include "odediscover/errors.hpp"

namespace odediscover::pareto {

namespace {

constexpr double kPhi = 1.6180339887498949;
constexpr double kClamp = 1e-300;
constexpr double kCurvatureTol = 1e-6;

struct Node {
    double x;  // log lambda
    double px, py;
};

}  // namespace

double menger_curvature(double x1, double y1, double x2, double y2, double x3, double y3) {
    const double cross = (x2 - x1) * (y3 - y2) - (y2 - y1) * (x3 - x2);
    const double a = std::hypot(x2 - x1, y2 - y1);
    const double b = std::hypot(x3 - x2, y3 - y2);
    const double c = std::hypot(x3 - x1, y3 - y1);
    const double den = a * b * c;
    if (!(den > 0.0)) return 0.0;
    return 2.0 * cross / den;
}

CornerResult corner_search(const Evaluator& evaluate, double lambda_min, double lambda_max, int max_evals,
                           double rel_width) {
    if (!(lambda_min > 0.0) || !(lambda_max > lambda_min))
        throw InvalidArgument("corner search needs 0 < lambda_min < lambda_max");
    if (max_evals < 4) throw InvalidArgument("corner search needs max_evals >= 4");

    CornerResult out;
    double xscale = 1.0, yscale = 1.0, x0 = 0.0, y0 = 0.0;
    auto eval = [&](double loglam) {
        const double lam = std::exp(loglam);
        ParetoCurvePoint pt = evaluate(lam);
        pt.lambda = lam;
        if (!std::isfinite(pt.reg_residual) || !std::isfinite(pt.sol_residual)) {
            std::ostringstream os;
            os << "non-finite Pareto residual at lambda=" << lam;
            throw Error(os.str());
        }
        if (pt.reg_residual <= 0.0) {
            pt.reg_residual = kClamp;
            pt.clamped = true;
        }
        if (pt.sol_residual <= 0.0) {
            pt.sol_residual = kClamp;
            pt.clamped = true;
        }
        out.trace.push_back(pt);
        ++out.evaluations;
        return Node{loglam, std::log(pt.sol_residual), std::log(pt.reg_residual)};
    };
    auto curv = [&](const Node& a, const Node& b, const Node& c) {
        return menger_curvature((a.px - x0) / xscale, (a.py - y0) / yscale, (b.px - x0) / xscale,
                                (b.py - y0) / yscale, (c.px - x0) / xscale, (c.py - y0) / yscale);
    };
    auto inner = [](double a, double d) { return (d + kPhi * a) / (1.0 + kPhi); };

    const double la = std::log(lambda_min), ld = std::log(lambda_max);
    Node p1 = eval(la), p4 = eval(ld);
    // Normalize the plane by the extent spanned by the bracket ends.
    x0 = std::min(p1.px, p4.px);
    y0 = std::min(p1.py, p4.py);
    if (std::abs(p4.px - p1.px) > 0.0) xscale = std::abs(p4.px - p1.px);
    if (std::abs(p4.py - p1.py) > 0.0) yscale = std::abs(p4.py - p1.py);
    Node p2 = eval(inner(la, ld));
    Node p3 = eval(p1.x + p4.x - p2.x);

    double best_curv = -INFINITY;
    double corner = p2.x;
    auto done = [&] {
        return out.evaluations >= max_evals || (std::exp(p4.x) - std::exp(p1.x)) / std::exp(p4.x) < rel_width;
    };
    while (true) {
        out.brackets.push_back({std::exp(p1.x), std::exp(p2.x), std::exp(p3.x), std::exp(p4.x)});
        double c2 = curv(p1, p2, p3);
        double c3 = curv(p2, p3, p4);
        // A concave stretch on the right: pull the right end in until the
        // right triple turns convex (or the budget runs out).
        while (c3 < 0.0 && !done()) {
            p4 = p3;
            p3 = p2;
            p2 = eval(inner(p1.x, p4.x));
            out.brackets.push_back({std::exp(p1.x), std::exp(p2.x), std::exp(p3.x), std::exp(p4.x)});
            c2 = curv(p1, p2, p3);
            c3 = curv(p2, p3, p4);
        }
        if (c2 > c3) {
            corner = p2.x;
            best_curv = std::max(best_curv, c2);
        } else {
            corner = p3.x;
            best_curv = std::max(best_curv, c3);
        }
        if (done()) break;
        if (c2 > c3) {
            p4 = p3;
            p3 = p2;
            p2 = eval(inner(p1.x, p4.x));
        } else {
            p1 = p2;
            p2 = p3;
            p3 = eval(p1.x + p4.x - p2.x);
        }
    }
    out.lambda_corner = std::exp(corner);
    if (!(best_curv > kCurvatureTol)) {
        out.no_corner = true;
        out.lambda_corner = lambda_min;
    }
    return out;
}

GammaSelection gamma_pareto(const Evaluator& evaluate, double gamma_exp, int max_evals) {
    if (!(gamma_exp > 0.0)) throw InvalidArgument("gamma_pareto needs gamma_exp > 0");
    GammaSelection sel;
    sel.search = corner_search(evaluate, 0.1 * gamma_exp, 10.0 * gamma_exp, max_evals);
    sel.no_corner = sel.search.no_corner;
    sel.gamma = sel.no_corner ? gamma_exp : sel.search.lambda_corner;
    return sel;
}

}  // namespace odediscover::pareto
