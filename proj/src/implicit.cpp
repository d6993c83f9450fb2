#include "implicit.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>

namespace sobflow::detail {

ImplicitDiffusion::ImplicitDiffusion(const RadialGrid& grid, double robin)
    : n_(grid.size()), robin_(robin), lap_(laplacian_rows(grid)), bc_(derivative_row(grid, grid.size() - 1)) {
    auto widen = [&](const OperatorRow& row, int i) {
        kl_ = std::max(kl_, i - row.first);
        ku_ = std::max(ku_, row.first + static_cast<int>(row.coeff.size()) - 1 - i);
    };
    for (int i = 0; i + 1 < n_; ++i) widen(lap_[static_cast<std::size_t>(i)], i);
    widen(bc_, n_ - 1);
}

std::vector<double> ImplicitDiffusion::laplacian(std::span<const double> z) const {
    std::vector<double> out(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
        const auto& row = lap_[static_cast<std::size_t>(i)];
        double acc = 0.0;
        for (std::size_t k = 0; k < row.coeff.size(); ++k) acc += row.coeff[k] * z[static_cast<std::size_t>(row.first) + k];
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

NewtonOutcome ImplicitDiffusion::step(std::span<const double> v_old, std::vector<double>& z, double dt,
                                      const Constitutive& law, double tol, int max_iter) const {
    const int ldab = 2 * kl_ + ku_ + 1;
    const auto un = static_cast<std::size_t>(n_);
    std::vector<double> ab(static_cast<std::size_t>(ldab) * un);
    std::vector<double> rhs(un);
    std::vector<lapack_int> ipiv(un);
    NewtonOutcome out;

    auto put = [&](int i, int j, double a) {
        ab[static_cast<std::size_t>(j) * static_cast<std::size_t>(ldab) + static_cast<std::size_t>(kl_ + ku_ + i - j)] += a;
    };

    for (int it = 1; it <= max_iter; ++it) {
        std::fill(ab.begin(), ab.end(), 0.0);
        const std::vector<double> lz = laplacian(z);
        for (int i = 0; i + 1 < n_; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const auto& row = lap_[ui];
            rhs[ui] = -(law.value(i, z[ui]) - v_old[ui] - dt * lz[ui]);
            for (std::size_t k = 0; k < row.coeff.size(); ++k) put(i, row.first + static_cast<int>(k), -dt * row.coeff[k]);
            put(i, i, law.slope(i, z[ui]));
        }
        {
            const int i = n_ - 1;
            double bc = robin_ * z.back();
            for (std::size_t k = 0; k < bc_.coeff.size(); ++k) {
                bc += bc_.coeff[k] * z[static_cast<std::size_t>(bc_.first) + k];
                put(i, bc_.first + static_cast<int>(k), bc_.coeff[k]);
            }
            put(i, i, robin_);
            rhs.back() = -bc;
        }
        const lapack_int info =
            LAPACKE_dgbsv(LAPACK_COL_MAJOR, n_, kl_, ku_, 1, ab.data(), ldab, ipiv.data(), rhs.data(), n_);
        if (info != 0) return out;

        // Damp the update so that a positive unknown stays positive.
        double alpha = 1.0;
        if (law.positive_unknown) {
            for (std::size_t i = 0; i < un; ++i) {
                if (z[i] + rhs[i] <= 0.0) alpha = std::min(alpha, 0.5 * z[i] / -rhs[i]);
            }
        }
        double update = 0.0;
        for (std::size_t i = 0; i < un; ++i) {
            const double dz = alpha * rhs[i];
            const double scale = law.positive_unknown ? std::max(std::abs(z[i]), law.scale_floor) : 1.0;
            z[i] += dz;
            update = std::max(update, std::abs(dz) / scale);
        }
        out.iterations = it;
        out.last_update = update;
        if (!std::all_of(z.begin(), z.end(), [](double x) { return std::isfinite(x); })) return out;
        if (alpha == 1.0 && update <= tol) {
            out.converged = true;
            return out;
        }
    }
    return out;
}

StepResult ImplicitDiffusion::advance(std::span<const double> v_old, std::span<const double> z_old, double dt,
                                      const Constitutive& law, double tol, int max_iter, int order) const {
    StepResult res;
    const auto un = static_cast<std::size_t>(n_);
    auto values_of = [&](const std::vector<double>& z) {
        std::vector<double> v(un);
        for (std::size_t i = 0; i < un; ++i) v[i] = law.value(static_cast<int>(i), z[i]);
        return v;
    };
    auto admissible = [&](const std::vector<double>& z) {
        return !law.positive_unknown || std::all_of(z.begin(), z.end(), [](double x) { return x > 0.0; });
    };

    std::vector<double> full(z_old.begin(), z_old.end());
    if (!step(v_old, full, dt, law, tol, max_iter).converged || !admissible(full)) return res;
    if (order == 1) {
        res.v = values_of(full);
        res.z = std::move(full);
        res.ok = true;
        return res;
    }
    std::vector<double> half(z_old.begin(), z_old.end());
    if (!step(v_old, half, 0.5 * dt, law, tol, max_iter).converged || !admissible(half)) return res;
    const std::vector<double> v_half = values_of(half);
    if (!step(v_half, half, 0.5 * dt, law, tol, max_iter).converged || !admissible(half)) return res;

    const std::vector<double> v_full = values_of(full), v_two = values_of(half);
    res.v.resize(un);
    res.z.resize(un);
    for (std::size_t i = 0; i < un; ++i) {
        res.v[i] = 2.0 * v_two[i] - v_full[i];
        res.z[i] = law.inverse(static_cast<int>(i), res.v[i]);
    }
    res.ok = std::all_of(res.z.begin(), res.z.end(), [](double x) { return std::isfinite(x); }) && admissible(res.z);
    return res;
}

}  // namespace sobflow::detail
