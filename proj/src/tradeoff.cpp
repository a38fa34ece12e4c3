#include "dtv/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "dtv/error.hpp"

namespace dtv {

void TradeoffParams::validate() const {
    if (!(a0 > 0.5 && a0 <= 1.0)) throw Error(ErrorKind::InvalidArgument, "a0 must be in (0.5, 1]");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorKind::InvalidArgument, "lambda must be >= 0");
    if (!(e_r >= 0.0 && e_r < 1.0)) throw Error(ErrorKind::InvalidArgument, "e_r must be in [0, 1)");
    if (!(e_d >= 0.0 && e_d < 1.0)) throw Error(ErrorKind::InvalidArgument, "e_d must be in [0, 1)");
}

namespace {

void require_n(int n) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "sub-claim count must be >= 1");
}

void require_k(double k) {
    if (!(k >= 1.0) || !std::isfinite(k)) throw Error(ErrorKind::InvalidArgument, "complexity must be >= 1");
}

}  // namespace

double accuracy_curve(const TradeoffParams& params, double k) {
    require_k(k);
    return 0.5 + (params.a0 - 0.5) * std::exp(-params.lambda * (k - 1.0));
}

double cumulative_retrieval_noise(double e_r, int n) {
    require_n(n);
    return 1.0 - std::pow(1.0 - e_r, n);
}

double decomposition_noise(double e_d, int n) {
    require_n(n);
    return 1.0 - std::pow(1.0 - e_d, n - 1);
}

TradeoffPoint evaluate_point(const TradeoffParams& params, double k_o, int n) {
    params.validate();
    require_k(k_o);
    require_n(n);
    TradeoffPoint p;
    p.k_o = k_o;
    p.n = n;
    p.k_d = std::max(1.0, k_o / n);
    p.a_baseline = accuracy_curve(params, k_o) * (1.0 - params.e_r);
    // Survival factors are used directly so that n == 1 reproduces the baseline bit for bit.
    p.a_decomposed = accuracy_curve(params, p.k_d) * std::pow(1.0 - params.e_d, n - 1) *
                     std::pow(1.0 - params.e_r, n);
    p.delta_err = p.a_decomposed - p.a_baseline;
    return p;
}

std::optional<int> first_negative(const std::function<double(int)>& delta, int n_max) {
    for (int n = 2; n <= n_max; ++n) {
        if (delta(n) < 0.0) return n;
    }
    return std::nullopt;
}

std::optional<int> crossover_n(const TradeoffParams& params, double k_o, int n_max) {
    if (n_max < 2) throw Error(ErrorKind::InvalidArgument, "n_max must be >= 2");
    return first_negative([&](int n) { return evaluate_point(params, k_o, n).delta_err; }, n_max);
}

std::vector<TradeoffPoint> sweep_grid(const TradeoffParams& params, const std::vector<double>& k_values,
                                      const std::vector<int>& n_values) {
    if (k_values.empty() || n_values.empty()) throw Error(ErrorKind::InvalidArgument, "empty sweep range");
    std::vector<TradeoffPoint> points;
    points.reserve(k_values.size() * n_values.size());
    for (double k : k_values) {
        for (int n : n_values) points.push_back(evaluate_point(params, k, n));
    }
    std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) {
        return a.k_o != b.k_o ? a.k_o < b.k_o : a.n < b.n;
    });
    return points;
}

void write_sweep_csv(std::ostream& out, const std::vector<TradeoffPoint>& points) {
    out << "k_o,n,k_d,a_baseline,a_decomposed,delta_err\n";
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(17);
    for (const auto& p : points) {
        out << p.k_o << ',' << p.n << ',' << p.k_d << ',' << p.a_baseline << ',' << p.a_decomposed << ','
            << p.delta_err << '\n';
    }
    out.flags(flags);
    out.precision(precision);
}

}  // namespace dtv
