#pragma once

#include <functional>

#include "sktau/schottky.hpp"

namespace sktau {

struct QSeriesConfig {
    int truncation = 0;
    double tail_bound = 0.0;  // >= sum_{m>N} |q|^m/(1-|q|)

    // smallest N with |q|^N <= eps
    static QSeriesConfig for_modulus(double abs_q, double eps = 1e-16);
    static QSeriesConfig with_truncation(double abs_q, int n);
};

// sum_{m=1}^{N} log(1 - q^m), principal branch per factor
cplx log_euler_product(cplx q, const QSeriesConfig& cfg);
// Euler pentagonal series sum_k (-1)^k q^{k(3k-1)/2}, summed until terms drop below eps
cplx pentagonal_series(cplx q, double eps = 1e-18);
// 1 - 24 sum sigma_1(n) q^n written as Lambert series
cplx eisenstein_e2(cplx tau);

struct EtaValue {
    cplx value;
    cplx log_value;  // 2 pi i tau/24 + sum log(1-q^m)
    double tail_bound;
    int terms;
};

EtaValue eta(cplx tau);
EtaValue eta(cplx tau, const QSeriesConfig& cfg);

struct FProductResult {
    cplx value;
    cplx log_value;
    long classes_used = 0;
    int max_word_length = 0;
    double delta_gate = 0.0;
    double error_estimate = 0.0;
    bool partial = false;
};

struct FProductOptions {
    double inner_eps = 1e-17;          // inner product truncation |q_gamma|^N <= eps
    int delta_length = 8;              // word length used for the validity gate
    long class_budget = 20'000'000;    // beyond this the result is flagged partial
    bool check_delta = true;
};

FProductResult f_product(const MarkedSchottkyGroup& g, int max_word_length, const FProductOptions& opt = {});

struct HolomorphyCheck {
    cplx derivative;
    double cr_residual;
};

// CR residual of w -> log F(family(w)) at w0
HolomorphyCheck f_holomorphy_check(const std::function<MarkedSchottkyGroup(cplx)>& family, cplx w0,
                                   int max_word_length, double step = 1e-4);

}  // namespace sktau
