#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <vector>

namespace dtv {

// Analytic accuracy-vs-noise model of decompose-then-verify.
//   A(k)          = 0.5 + (a0 - 0.5) * exp(-lambda * (k - 1))
//   E_r(n)        = 1 - (1 - e_r)^n           cumulative retrieval noise
//   E_d(n)        = 1 - (1 - e_d)^(n - 1)     decomposition noise, zero without splitting
//   k_d           = max(1, k_o / n)
//   A_baseline    = A(k_o) * (1 - e_r)
//   A_decomposed  = A(k_d) * (1 - E_d) * (1 - E_r)
struct TradeoffParams {
    double a0 = 0.95;
    double lambda = 0.15;
    double e_r = 0.03;
    double e_d = 0.02;

    // Throws InvalidArgument unless a0 in (0.5,1], lambda >= 0, e_r and e_d in [0,1).
    void validate() const;
};

struct TradeoffPoint {
    double k_o = 1.0;
    int n = 1;
    double k_d = 1.0;
    double a_baseline = 0.0;
    double a_decomposed = 0.0;
    double delta_err = 0.0;
};

double accuracy_curve(const TradeoffParams& params, double k);
double cumulative_retrieval_noise(double e_r, int n);
double decomposition_noise(double e_d, int n);

TradeoffPoint evaluate_point(const TradeoffParams& params, double k_o, int n);

// Smallest n in [2, n_max] with delta(n) < 0.
std::optional<int> first_negative(const std::function<double(int)>& delta, int n_max);
std::optional<int> crossover_n(const TradeoffParams& params, double k_o, int n_max);

// Every (k_o, n) pair, sorted by (k_o, n).
std::vector<TradeoffPoint> sweep_grid(const TradeoffParams& params, const std::vector<double>& k_values,
                                      const std::vector<int>& n_values);

// Header k_o,n,k_d,a_baseline,a_decomposed,delta_err; values printed with 17 significant digits.
void write_sweep_csv(std::ostream& out, const std::vector<TradeoffPoint>& points);

}  // namespace dtv
