/*
 * Copyright 2026 The crowdcl Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CROWDCL_METRICS_HPP
#define CROWDCL_METRICS_HPP

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

#include "crowdcl/error.hpp"

namespace crowdcl {

namespace detail {

/// Regularized incomplete beta function I_x(a, b), continued-fraction form.
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

/// Upper-tail probability of a Student-t variable with df degrees of freedom.
inline double student_t_sf(double t, double df) {
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    const double x = df / (df + t * t);
    const double half_tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
    return t >= 0.0 ? half_tail : 1.0 - half_tail;
}

inline void check_same_length(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("input vectors differ in length");
}

} // namespace detail

/// Concordance correlation coefficient with population (1/N) moments:
/// 2*s_xy / (s_x^2 + s_y^2 + (mean_x - mean_y)^2).
inline double ccc(std::span<const double> x, std::span<const double> y) {
    detail::check_same_length(x, y);
    const std::size_t n = x.size();
    if (n < 2) throw DomainError("ccc needs at least 2 samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw DomainError("ccc inputs must be finite");
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double vx = 0.0, vy = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        vx += dx * dx;
        vy += dy * dy;
        cov += dx * dy;
    }
    vx /= static_cast<double>(n);
    vy /= static_cast<double>(n);
    cov /= static_cast<double>(n);
    if (vx == 0.0 && vy == 0.0) throw DomainError("ccc undefined: both inputs are constant");
    const double md = mx - my;
    return 2.0 * cov / (vx + vy + md * md);
}

/// F-score from macro-averaged precision and recall: F = 2PR/(P+R).
/// A class with no predictions contributes precision 0; one absent from the
/// truth contributes recall 0.
inline double macro_f1(std::span<const int> pred, std::span<const int> truth, int num_classes) {
    if (pred.size() != truth.size()) throw DomainError("input vectors differ in length");
    if (pred.empty()) throw DomainError("macro_f1 needs at least one sample");
    if (num_classes < 1) throw DomainError("macro_f1 needs at least one class");
    std::vector<double> tp(static_cast<std::size_t>(num_classes), 0.0);
    std::vector<double> pred_count(static_cast<std::size_t>(num_classes), 0.0);
    std::vector<double> truth_count(static_cast<std::size_t>(num_classes), 0.0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] < 0 || pred[i] >= num_classes || truth[i] < 0 || truth[i] >= num_classes)
            throw DomainError("class index out of range");
        pred_count[static_cast<std::size_t>(pred[i])] += 1.0;
        truth_count[static_cast<std::size_t>(truth[i])] += 1.0;
        if (pred[i] == truth[i]) tp[static_cast<std::size_t>(pred[i])] += 1.0;
    }
    double precision = 0.0, recall = 0.0;
    for (int c = 0; c < num_classes; ++c) {
        const auto k = static_cast<std::size_t>(c);
        precision += pred_count[k] > 0 ? tp[k] / pred_count[k] : 0.0;
        recall += truth_count[k] > 0 ? tp[k] / truth_count[k] : 0.0;
    }
    precision /= num_classes;
    recall /= num_classes;
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

struct SignificanceResult {
    double t_stat = 0.0;
    double p_value = 1.0;
    bool significant = false; // p_value <= 0.05
};

/// Welch two-sample t-test of H1: mean(a) > mean(b). Upper-tail p-value from
/// the Student-t distribution with Welch-Satterthwaite degrees of freedom.
inline SignificanceResult one_tailed_t_test(std::span<const double> a, std::span<const double> b) {
    const std::size_t na = a.size(), nb = b.size();
    if (na < 2 || nb < 2) throw DomainError("t-test needs at least 2 samples per group");
    double ma = 0.0, mb = 0.0;
    for (double v : a) ma += v;
    for (double v : b) mb += v;
    ma /= static_cast<double>(na);
    mb /= static_cast<double>(nb);
    double va = 0.0, vb = 0.0;
    for (double v : a) va += (v - ma) * (v - ma);
    for (double v : b) vb += (v - mb) * (v - mb);
    va /= static_cast<double>(na - 1);
    vb /= static_cast<double>(nb - 1);

    SignificanceResult res;
    if (va == 0.0 && vb == 0.0) {
        // Degenerate: direction of the mean difference decides outright.
        if (ma == mb) {
            res.t_stat = 0.0;
            res.p_value = 0.5;
        } else {
            res.t_stat = ma > mb ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
            res.p_value = ma > mb ? 0.0 : 1.0;
        }
    } else {
        const double sa = va / static_cast<double>(na);
        const double sb = vb / static_cast<double>(nb);
        res.t_stat = (ma - mb) / std::sqrt(sa + sb);
        const double df = (sa + sb) * (sa + sb) /
                          (sa * sa / static_cast<double>(na - 1) + sb * sb / static_cast<double>(nb - 1));
        res.p_value = detail::student_t_sf(res.t_stat, df);
    }
    res.significant = res.p_value <= 0.05;
    return res;
}

// Braced-list conveniences (std::span does not bind initializer lists).
inline double ccc(std::initializer_list<double> x, std::initializer_list<double> y) {
    return ccc(std::span<const double>(x.begin(), x.size()),
               std::span<const double>(y.begin(), y.size()));
}

inline double macro_f1(std::initializer_list<int> pred, std::initializer_list<int> truth,
                       int num_classes) {
    return macro_f1(std::span<const int>(pred.begin(), pred.size()),
                    std::span<const int>(truth.begin(), truth.size()), num_classes);
}

inline SignificanceResult one_tailed_t_test(std::initializer_list<double> a,
                                            std::initializer_list<double> b) {
    return one_tailed_t_test(std::span<const double>(a.begin(), a.size()),
                             std::span<const double>(b.begin(), b.size()));
}

} // namespace crowdcl

#endif
