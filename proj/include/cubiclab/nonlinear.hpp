#pragma once

// Evaluation of the trilinear form C(u, conj u, u):
//   C^(xi4) = kappa * sum_{xi1 - xi2 + xi3 = xi4} c(xi1,xi2,xi3) u^1 conj(u^2) u^3,
// kappa = dxi^2 / (2 pi), all frequencies on the grid and the output
// truncated to the grid modes. The pointwise paths zero-pad by `pad_factor`
// (2 makes cubic products alias-free).

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cubiclab/spectral.hpp"
#include "cubiclab/symbols.hpp"

namespace cubiclab {

enum class Strategy { pointwise_constant, separable, dense_oracle };

inline const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::pointwise_constant: return "pointwise-constant";
        case Strategy::separable: return "separable";
        default: return "dense-oracle";
    }
}

inline constexpr int kDenseOracleMaxPoints = 128;

struct LowRankOptions {
    double tolerance = 1e-12;  // relative singular-value cutoff
    int max_rank = 64;
    int error_samples = 2000;
    unsigned seed = 12345;
};

struct LowRankInfo {
    int rank = 0;                    // number of separable terms
    double max_relative_error = 0.0; // sampled, relative to sup |c|
};

class NonlinearityPlan {
public:
    struct Term {
        cd coef{1.0, 0.0};
        CVec alpha, beta, gamma;  // multiplier tables on the grid (FFT order)
    };

    // Picks the strategy from the symbol structure: constant -> pointwise,
    // separable -> separable, black box -> dense oracle on small grids and a
    // low-rank separable factorization otherwise.
    static NonlinearityPlan make(const TrilinearSymbol& symbol, const Grid& grid, int pad_factor = 2,
                                 const LowRankOptions& lr = {}) {
        switch (symbol.structure()) {
            case SymbolStructure::constant:
                return make(symbol, grid, Strategy::pointwise_constant, pad_factor, lr);
            case SymbolStructure::separable:
                return make(symbol, grid, Strategy::separable, pad_factor, lr);
            default:
                return make(symbol, grid,
                            grid.size() <= kDenseOracleMaxPoints ? Strategy::dense_oracle
                                                                 : Strategy::separable,
                            pad_factor, lr);
        }
    }

    static NonlinearityPlan make(const TrilinearSymbol& symbol, const Grid& grid, Strategy strategy,
                                 int pad_factor = 2, const LowRankOptions& lr = {}) {
        if (pad_factor < 1) throw std::invalid_argument("NonlinearityPlan: pad factor must be >= 1");
        NonlinearityPlan p;
        p.symbol_ = symbol;
        p.grid_ = grid;
        p.strategy_ = strategy;
        p.pad_factor_ = pad_factor;
        switch (strategy) {
            case Strategy::pointwise_constant:
                if (!symbol.is_constant())
                    throw std::invalid_argument("pointwise-constant strategy needs a constant symbol");
                p.mu_ = symbol.constant_part();
                break;
            case Strategy::dense_oracle:
                if (grid.size() > kDenseOracleMaxPoints)
                    throw std::invalid_argument("dense-oracle strategy limited to n_points <= " +
                                                std::to_string(kDenseOracleMaxPoints));
                break;
            case Strategy::separable:
                p.mu_ = symbol.structure() == SymbolStructure::black_box ? cd{0.0, 0.0}
                                                                         : symbol.constant_part();
                if (symbol.structure() == SymbolStructure::separable) {
                    for (const auto& t : symbol.terms()) {
                        p.terms_.push_back({t.coef, multiplier_table(grid, t.alpha),
                                            multiplier_table(grid, t.beta),
                                            multiplier_table(grid, t.gamma)});
                    }
                    p.low_rank_.rank = static_cast<int>(symbol.terms().size());
                } else if (symbol.structure() == SymbolStructure::black_box) {
                    p.factorize(lr);
                }
                break;
        }
        return p;
    }

    Strategy strategy() const { return strategy_; }
    const Grid& grid() const { return grid_; }
    const TrilinearSymbol& symbol() const { return symbol_; }
    int pad_factor() const { return pad_factor_; }
    const LowRankInfo& low_rank() const { return low_rank_; }
    const std::vector<Term>& terms() const { return terms_; }

    // Spectrum of C(u, conj u, u).
    Spectrum apply(const Spectrum& u) const {
        if (!(u.grid == grid_)) throw std::invalid_argument("NonlinearityPlan: grid mismatch");
        switch (strategy_) {
            case Strategy::pointwise_constant: return apply_pointwise(u);
            case Strategy::separable: return apply_separable(u);
            default: return apply_dense(u);
        }
    }

    Field apply(const Field& u) const { return inverse_transform(apply(transform(u))); }

private:
    int padded_size() const { return pad_factor_ * grid_.size(); }

    Spectrum apply_pointwise(const Spectrum& u) const {
        CVec w = detail::to_padded_physical(u, padded_size());
        for (auto& v : w) v = mu_ * std::norm(v) * v;
        return detail::from_padded_physical(w, grid_);
    }

    Spectrum apply_separable(const Spectrum& u) const {
        const int m = padded_size();
        CVec acc(m, cd{0.0, 0.0});
        if (mu_ != cd{0.0, 0.0}) {
            const CVec w = detail::to_padded_physical(u, m);
            for (int i = 0; i < m; ++i) acc[i] = mu_ * std::norm(w[i]) * w[i];
        }
        for (const auto& t : terms_) {
            const CVec a = detail::to_padded_physical(apply_multiplier(u, t.alpha), m);
            const CVec b = detail::to_padded_physical(apply_multiplier(u, t.beta), m);
            const CVec g = detail::to_padded_physical(apply_multiplier(u, t.gamma), m);
            for (int i = 0; i < m; ++i) acc[i] += t.coef * a[i] * std::conj(b[i]) * g[i];
        }
        return detail::from_padded_physical(acc, grid_);
    }

    Spectrum apply_dense(const Spectrum& u) const {
        const int n = grid_.size();
        const double kappa = grid_.dxi() * grid_.dxi() / kTwoPi;
        Spectrum out(grid_);
        for (int j4 = 0; j4 < n; ++j4) {
            const int m4 = grid_.mode(j4);
            cd acc{0.0, 0.0};
            for (int j1 = 0; j1 < n; ++j1) {
                const int m1 = grid_.mode(j1);
                for (int j3 = 0; j3 < n; ++j3) {
                    const int m3 = grid_.mode(j3);
                    const int m2 = m1 + m3 - m4;
                    if (m2 < -n / 2 || m2 >= n / 2) continue;
                    const int j2 = grid_.slot(m2);
                    acc += symbol_(grid_.frequency(j1), grid_.frequency(j2), grid_.frequency(j3)) *
                           u[j1] * std::conj(u[j2]) * u[j3];
                }
            }
            out[j4] = kappa * acc;
        }
        return out;
    }

    // Tensor-train factorization of the sampled symbol on the grid modes,
    // c(j1,j2,j3) ~ sum_{r,s} U[j1,r] Core[(r,j2),s] conj(V[j3,s]).
    void factorize(const LowRankOptions& lr) {
        using Mat = Eigen::MatrixXcd;
        const int n = grid_.size();
        const RVec xi = grid_.frequencies();
        Mat unfold1(n, static_cast<Eigen::Index>(n) * n);  // rows j1, cols (j2, j3)
        double sup = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    const cd v = symbol_(xi[a], xi[b], xi[c]);
                    unfold1(a, static_cast<Eigen::Index>(b) * n + c) = v;
                    sup = std::max(sup, std::abs(v));
                }
        if (sup == 0.0) {
            low_rank_ = {0, 0.0};
            return;
        }
        // leading left singular vectors of a (thin) matrix
        auto leading = [&](const Mat& a) {
            Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU);
            const auto& sv = svd.singularValues();  // descending
            int keep = 0;
            while (keep < sv.size() && keep < lr.max_rank && sv(keep) > lr.tolerance * sv(0)) ++keep;
            keep = std::max(keep, 1);
            return Mat(svd.matrixU().leftCols(keep));
        };
        const Mat u = leading(unfold1);  // n x r1
        const Eigen::Index r1 = u.cols();
        const Mat proj = u.adjoint() * unfold1;  // r1 x (n*n)
        Mat unfold2(r1 * n, n);                  // rows (r, j2), cols j3
        for (Eigen::Index r = 0; r < r1; ++r)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) unfold2(r * n + b, c) = proj(r, static_cast<Eigen::Index>(b) * n + c);
        const Mat v = leading(unfold2.adjoint());  // n x r2
        const Mat core = unfold2 * v;                         // (r1*n) x r2
        const Eigen::Index r2 = v.cols();

        terms_.clear();
        for (Eigen::Index r = 0; r < r1; ++r) {
            for (Eigen::Index s = 0; s < r2; ++s) {
                Term t;
                t.alpha.resize(n);
                t.beta.resize(n);
                t.gamma.resize(n);
                for (int j = 0; j < n; ++j) {
                    t.alpha[j] = u(j, r);
                    t.beta[j] = std::conj(core(r * n + j, s));
                    t.gamma[j] = std::conj(v(j, s));
                }
                terms_.push_back(std::move(t));
            }
        }

        std::mt19937 rng(lr.seed);
        std::uniform_int_distribution<int> pick(0, n - 1);
        double err = 0.0;
        for (int k = 0; k < lr.error_samples; ++k) {
            const int a = pick(rng), b = pick(rng), c = pick(rng);
            cd approx{0.0, 0.0};
            for (const auto& t : terms_) approx += t.alpha[a] * std::conj(t.beta[b]) * t.gamma[c];
            err = std::max(err, std::abs(approx - unfold1(a, static_cast<Eigen::Index>(b) * n + c)));
        }
        low_rank_ = {static_cast<int>(terms_.size()), err / sup};
    }

    TrilinearSymbol symbol_;
    Grid grid_;
    Strategy strategy_ = Strategy::pointwise_constant;
    int pad_factor_ = 2;
    cd mu_{0.0, 0.0};
    std::vector<Term> terms_;
    LowRankInfo low_rank_;
};

inline Field apply_nonlinearity(const NonlinearityPlan& plan, const Field& u) { return plan.apply(u); }

}  // namespace cubiclab
