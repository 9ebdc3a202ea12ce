#pragma once

// Scenario sweeps: single-feed spectral-efficiency maps, spacing studies,
// the two-user LMMSE trajectory, and impedance / near-field dumps.

#include <Eigen/Dense>

#include <algorithm>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

#include "fields.hpp"
#include "linearray.hpp"
#include "linkrate.hpp"
#include "multiport.hpp"
#include "quadrature.hpp"
#include "scenario.hpp"

namespace connarray {

struct RunContext {
    unsigned threads = 1;
    quadrature::AccuracyLog log;
    double max_rn_asymmetry = 0.0;  // largest ||R - R^H|| / ||R|| seen before symmetrization
};

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled exactly once and results are written by index, so the output
/// does not depend on scheduling. The exception of the lowest failing
/// index is rethrown.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body body) {
    std::vector<std::exception_ptr> errors(n);
    auto worker = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < n; i += stride) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t t = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
    if (t == 1) {
        worker(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < t; ++w) pool.emplace_back(worker, w, t);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Medium, geometry and finite-array impedance shared by every sweep point.
struct ArrayModel {
    Medium med;
    LineGeometry geom;
    int l_max = 0;
    std::size_t grid_size = 0;
    DiscreteImpedance kernel;
    Eigen::MatrixXcd zt;
};

inline ArrayModel build_array(const Scenario& sc, std::optional<double> spacing = std::nullopt) {
    ArrayModel a{sc.medium(), sc.geometry(spacing), 0, sc.grid_size(), {}, {}};
    a.geom.validate();
    a.l_max = sc.l_max(a.geom);
    quadrature::TailSumSpec tail;
    tail.l_max = a.l_max;
    a.kernel = impedance_kernel(a.geom, a.med, a.grid_size, tail);
    a.zt = finite_array_impedance(a.kernel, a.geom.num_feeds);
    return a;
}

struct SeMapRow {
    double spacing = 0.0;  // config length units
    double r = 0.0;
    double z = 0.0;
    double se_bits = 0.0;
};

namespace detail {

inline void merge(RunContext& ctx, const std::vector<quadrature::AccuracyLog>& logs, const std::vector<double>& asym) {
    for (const auto& l : logs) ctx.log.warnings.insert(ctx.log.warnings.end(), l.warnings.begin(), l.warnings.end());
    for (double a : asym) ctx.max_rn_asymmetry = std::max(ctx.max_rn_asymmetry, a);
}

inline void se_rows(const Scenario& sc, double spacing, RunContext& ctx, std::vector<SeMapRow>& out) {
    const ArrayModel arr = build_array(sc, spacing);
    const std::vector<double> rs = sc.r_grid.values();
    const std::vector<double> zs = sc.z_grid.values();
    const int c = sc.driven();
    std::vector<SeMapRow> rows(rs.size() * zs.size());
    std::vector<quadrature::AccuracyLog> logs(rs.size());
    std::vector<double> asym(rs.size(), 0.0);

    parallel_for(rs.size(), ctx.threads, [&](std::size_t i) {
        std::vector<ReceiverSpec> users;
        for (double z : zs) users.push_back(sc.receiver(rs[i], z));
        const Eigen::MatrixXcd hrt = build_hrt(users, arr.geom, arr.med, arr.zt, sc.field_numerics(), &logs[i]);
        for (std::size_t j = 0; j < zs.size(); ++j) {
            Eigen::MatrixXcd yr(1, 1);
            yr(0, 0) = receiver_admittance(users[j], arr.med);
            const auto model = assemble_gmimo(arr.zt, yr, hrt.row(static_cast<Eigen::Index>(j)));
            const ChannelRealization full = end_to_end(model, sc.amplifier);
            asym[i] = std::max(asym[i], full.asymmetry);
            ChannelRealization single;
            single.h = full.h.col(c);
            single.rn = full.rn;
            rows[i * zs.size() + j] = {spacing, rs[i], zs[j], spectral_efficiency_point(single, sc.budget)};
        }
    });
    merge(ctx, logs, asym);
    out.insert(out.end(), rows.begin(), rows.end());
}

}  // namespace detail

/// Spectral efficiency of a single excited feed over the (r, z) grid, in
/// row-major order (r outer, z inner). A spacing study repeats the map for
/// every listed spacing.
inline std::vector<SeMapRow> run_se_map(const Scenario& sc, RunContext& ctx) {
    std::vector<SeMapRow> out;
    if (sc.sweep == SweepKind::spacing_study) {
        for (double d : sc.spacings) detail::se_rows(sc, d, ctx, out);
    } else {
        detail::se_rows(sc, sc.feed_spacing, ctx, out);
    }
    return out;
}

struct TwoUserRow {
    double z2 = 0.0;
    double rate_user1 = 0.0;
    double rate_user2 = 0.0;
};

/// User 1 fixed, user 2 stepping along a line parallel to the array; the
/// LMMSE precoder is recomputed at every step.
inline std::vector<TwoUserRow> run_two_user(const Scenario& sc, RunContext& ctx) {
    const ArrayModel arr = build_array(sc);
    const std::vector<double> zs = sc.moving_z.values();
    std::vector<ReceiverSpec> users{sc.receiver(sc.fixed_r, sc.fixed_z)};
    for (double z : zs) users.push_back(sc.receiver(sc.moving_r, z));
    const Eigen::MatrixXcd hall = build_hrt(users, arr.geom, arr.med, arr.zt, sc.field_numerics(), &ctx.log);

    std::vector<TwoUserRow> rows(zs.size());
    std::vector<double> asym(zs.size(), 0.0);
    parallel_for(zs.size(), ctx.threads, [&](std::size_t i) {
        Eigen::MatrixXcd hrt(2, arr.geom.num_feeds);
        hrt.row(0) = hall.row(0);
        hrt.row(1) = hall.row(static_cast<Eigen::Index>(i + 1));
        Eigen::MatrixXcd yr = Eigen::MatrixXcd::Zero(2, 2);
        yr(0, 0) = receiver_admittance(users[0], arr.med);
        yr(1, 1) = receiver_admittance(users[i + 1], arr.med);
        const ChannelRealization chan = end_to_end(assemble_gmimo(arr.zt, yr, hrt), sc.amplifier);
        asym[i] = chan.asymmetry;
        const Precoder pc = lmmse_precoder(chan.h, chan.rn, sc.budget);
        const RateResult rr = per_user_rates(chan.h, chan.rn, pc.p, pc.c);
        rows[i] = {zs[i], rr.per_user_rate[0], rr.per_user_rate[1]};
    });
    detail::merge(ctx, {}, asym);
    return rows;
}

struct FieldRow {
    double r = 0.0;
    double z = 0.0;
    cplx h_phi;  // A/m per ampere at the driven feed
};

/// H_phi over the (r, z) grid for a unit current at the driven feed with
/// every other feed open, i.e. feed voltages v = Z_T e_c.
inline std::vector<FieldRow> run_fields(const Scenario& sc, RunContext& ctx) {
    const ArrayModel arr = build_array(sc);
    const std::vector<double> rs = sc.r_grid.values();
    const std::vector<double> zs = sc.z_grid.values();
    const int n = arr.geom.num_feeds;
    const Eigen::VectorXcd v = arr.zt.col(sc.driven());
    const double u = sc.length_unit();
    std::vector<FieldRow> rows(rs.size() * zs.size());
    std::vector<quadrature::AccuracyLog> logs(rs.size());

    parallel_for(rs.size(), ctx.threads, [&](std::size_t i) {
        std::vector<double> offsets;
        for (double z : zs)
            for (int m = 0; m < n; ++m) offsets.push_back(z * u - arr.geom.feed_position(m));
        const auto res = unit_gap_field(rs[i] * u, offsets, arr.geom, arr.med, sc.field_numerics());
        logs[i].check(res, "unit_gap_field(r=" + std::to_string(rs[i]) + ")");
        for (std::size_t j = 0; j < zs.size(); ++j) {
            cplx h{};
            for (int m = 0; m < n; ++m) h += v[m] * res.value[static_cast<Eigen::Index>(j * n + m)];
            rows[i * zs.size() + j] = {rs[i], zs[j], h};
        }
    });
    detail::merge(ctx, logs, {});
    return rows;
}

}  // namespace connarray
