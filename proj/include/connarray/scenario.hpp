#pragma once

// Scenario configuration: TOML parsing, validation with field/line
// diagnostics, and the conversion from normalized (wavelength) units to
// the SI model.

#define TOML_HEADER_ONLY 1
#include <toml.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fields.hpp"
#include "linearray.hpp"
#include "linkrate.hpp"
#include "medium.hpp"
#include "multiport.hpp"

namespace connarray {

/// Invalid configuration. Carries one diagnostic per offending field.
class config_error : public std::runtime_error {
public:
    explicit config_error(std::vector<std::string> diagnostics)
        : std::runtime_error(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}

    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

private:
    static std::string join(const std::vector<std::string>& d) {
        std::string out;
        for (const auto& s : d) out += (out.empty() ? "" : "\n") + s;
        return out;
    }
    std::vector<std::string> diagnostics_;
};

enum class SweepKind { se_map, spacing_study, two_user_trajectory };

inline const char* to_string(SweepKind k) {
    switch (k) {
        case SweepKind::se_map: return "se_map";
        case SweepKind::spacing_study: return "spacing_study";
        case SweepKind::two_user_trajectory: return "two_user_trajectory";
    }
    return "?";
}

/// Inclusive arithmetic range start, start + step, ..., up to stop.
struct Range {
    double start = 0.0;
    double stop = 0.0;
    double step = 1.0;

    std::vector<double> values() const {
        std::vector<double> out;
        const double n = std::floor((stop - start) / step + 1e-9);
        for (long i = 0; i <= static_cast<long>(n); ++i) out.push_back(start + double(i) * step);
        return out;
    }
};

struct ScenarioNumerics {
    double alpha_max_multiplier = 100.0;
    int l_max = 0;              // 0 selects ceil(alpha_max Delta / 2 pi)
    std::size_t grid_size = 0;  // 0 selects max(1024, 64 N) rounded to a power of two
    double field_rel_tol = 1e-8;
    double field_tail_bound = 1e-12;
};

/// A validated scenario. Lengths are stored in the units of the config
/// file (wavelengths in normalized mode, metres otherwise); the helpers
/// below convert to metres.
struct Scenario {
    std::string name;
    bool normalized = true;
    double frequency_hz = 1e9;  // the reference frequency in normalized mode
    double loss_delta = 1e-4;

    double wire_radius = 0.002;
    double feed_spacing = 2.0;
    int num_feeds = 9;
    int driven_feed = -1;  // -1 selects the centre feed

    ReceiverKind receiver_kind = ReceiverKind::chu_loop;
    double dipole_length = 0.01;
    double chu_radius = 0.05;

    AmplifierChain amplifier;
    PowerBudget budget{1e-15};
    ScenarioNumerics numerics;

    SweepKind sweep = SweepKind::se_map;
    Range r_grid{0.05, 0.5, 0.05};
    Range z_grid{-1.5, 1.5, 0.025};
    std::vector<double> spacings;  // spacing_study only
    double fixed_r = 0.1, fixed_z = 0.0;
    double moving_r = 0.2;
    Range moving_z{-2.0, 2.0, 0.025};

    Medium medium() const { return Medium(frequency_hz, loss_delta); }

    /// Metres per config length unit.
    double length_unit() const { return normalized ? medium().wavelength() : 1.0; }

    LineGeometry geometry(std::optional<double> spacing = std::nullopt) const {
        const double u = length_unit();
        return {wire_radius * u, spacing.value_or(feed_spacing) * u, num_feeds, loss_delta};
    }

    int driven() const { return driven_feed >= 0 ? driven_feed : (num_feeds - 1) / 2; }

    ReceiverSpec receiver(double r, double z) const {
        const double u = length_unit();
        ReceiverSpec s;
        s.r = r * u;
        s.z = z * u;
        s.kind = receiver_kind;
        s.dipole_length = dipole_length * u;
        s.chu_radius = chu_radius * u;
        return s;
    }

    FieldNumerics field_numerics() const {
        FieldNumerics f;
        f.alpha_max_multiplier = numerics.alpha_max_multiplier;
        f.tail_bound = numerics.field_tail_bound;
        f.rel_tol = numerics.field_rel_tol;
        return f;
    }

    int l_max(const LineGeometry& geom) const {
        if (numerics.l_max > 0) return numerics.l_max;
        return default_l_max(geom, default_alpha_max(medium(), numerics.alpha_max_multiplier));
    }

    std::size_t grid_size() const {
        return numerics.grid_size > 0 ? numerics.grid_size : default_grid_size(num_feeds);
    }
};

namespace detail {

inline std::string where(const toml::node* n) {
    if (!n) return "";
    const auto& s = n->source();
    return " (line " + std::to_string(s.begin.line) + ", column " + std::to_string(s.begin.column) + ")";
}

class ConfigReader {
public:
    explicit ConfigReader(const toml::table& root) : root_(root) {}

    std::vector<std::string> diagnostics;

    const toml::node* node(std::string_view path) const { return root_.at_path(path).node(); }

    void number(std::string_view path, double& out) {
        const toml::node* n = node(path);
        if (!n) return;
        if (auto v = n->value<double>()) out = *v;
        else fail(path, "expected a number", n);
    }

    template <class Int>
    void integer(std::string_view path, Int& out) {
        const toml::node* n = node(path);
        if (!n) return;
        if (auto v = n->as_integer()) out = static_cast<Int>(v->get());
        else fail(path, "expected an integer", n);
    }

    void string(std::string_view path, std::string& out) {
        const toml::node* n = node(path);
        if (!n) return;
        if (auto v = n->value<std::string>()) out = *v;
        else fail(path, "expected a string", n);
    }

    void range(std::string_view path, Range& out) {
        const toml::node* n = node(path);
        if (!n) return;
        if (!n->is_table()) return fail(path, "expected a table {start, stop, step}", n);
        const std::string p(path);
        number(p + ".start", out.start);
        number(p + ".stop", out.stop);
        number(p + ".step", out.step);
        if (!(out.step > 0.0)) fail(p + ".step", "must be > 0", node(p + ".step"), n);
        else if (!(out.stop >= out.start)) fail(p + ".stop", "must be >= start", node(p + ".stop"), n);
        else if ((out.stop - out.start) / out.step > 1e6) fail(path, "more than 1e6 points", n);
    }

    void number_list(std::string_view path, std::vector<double>& out) {
        const toml::node* n = node(path);
        if (!n) return;
        const auto* arr = n->as_array();
        if (!arr) return fail(path, "expected an array of numbers", n);
        out.clear();
        for (const auto& e : *arr) {
            if (auto v = e.value<double>()) out.push_back(*v);
            else return fail(path, "expected an array of numbers", &e);
        }
    }

    void fail(std::string_view path, std::string_view msg, const toml::node* n, const toml::node* fallback = nullptr) {
        diagnostics.push_back(std::string(path) + ": " + std::string(msg) + where(n ? n : fallback));
    }

    void require(bool ok, std::string_view path, std::string_view msg) {
        if (!ok) fail(path, msg, node(path), node(path.substr(0, path.find('.'))));
    }

    /// Flags keys that the schema does not know about.
    void unknown_keys(const toml::table& t, const std::string& prefix, const std::vector<std::string>& known) {
        for (const auto& [k, v] : t) {
            const std::string key(k.str());
            bool found = false;
            for (const auto& kn : known) found = found || kn == key;
            if (!found) fail(prefix.empty() ? key : prefix + "." + key, "unknown key", &v);
        }
    }

private:
    const toml::table& root_;
};

}  // namespace detail

/// Parses and validates a scenario from TOML text. Every problem found is
/// reported; parse errors carry their line and column.
inline Scenario parse_scenario(std::string_view text, std::string_view source_name = "config") {
    toml::table root;
    try {
        root = toml::parse(text, source_name);
    } catch (const toml::parse_error& e) {
        const auto& b = e.source().begin;
        throw config_error({std::string(source_name) + ": parse error: " + std::string(e.description()) + " (line " +
                            std::to_string(b.line) + ", column " + std::to_string(b.column) + ")"});
    }

    Scenario s;
    detail::ConfigReader rd(root);
    rd.unknown_keys(root, "", {"name", "medium", "array", "receiver", "amplifier", "budget", "numerics", "sweep"});
    rd.string("name", s.name);
    const std::vector<std::pair<std::string, std::vector<std::string>>> schema = {
        {"medium", {"mode", "reference_frequency_hz", "frequency_hz", "loss_delta"}},
        {"array", {"wire_radius", "feed_spacing", "num_feeds", "driven_feed"}},
        {"receiver", {"kind", "dipole_length", "chu_radius"}},
        {"amplifier", {"source_resistance", "lna_input_resistance", "lna_gain_beta", "noise_figure", "temperature"}},
        {"budget", {"total_generator_power"}},
        {"numerics", {"alpha_max_multiplier", "l_max", "grid_size", "field_rel_tol", "field_tail_bound"}},
        {"sweep", {"kind", "r", "z", "spacings", "fixed_user", "moving_user"}},
    };
    for (const auto& [table, keys] : schema)
        if (const auto* t = root[table].as_table()) rd.unknown_keys(*t, table, keys);

    std::string mode = "normalized";
    rd.string("medium.mode", mode);
    if (mode == "normalized") {
        s.normalized = true;
        rd.number("medium.reference_frequency_hz", s.frequency_hz);
        if (rd.node("medium.frequency_hz")) rd.fail("medium.frequency_hz", "use reference_frequency_hz in normalized mode", rd.node("medium.frequency_hz"));
    } else if (mode == "physical") {
        s.normalized = false;
        if (!rd.node("medium.frequency_hz")) rd.fail("medium.frequency_hz", "required in physical mode", rd.node("medium"));
        rd.number("medium.frequency_hz", s.frequency_hz);
    } else {
        rd.fail("medium.mode", "must be \"normalized\" or \"physical\"", rd.node("medium.mode"));
    }
    rd.number("medium.loss_delta", s.loss_delta);

    rd.number("array.wire_radius", s.wire_radius);
    rd.number("array.feed_spacing", s.feed_spacing);
    rd.integer("array.num_feeds", s.num_feeds);
    rd.integer("array.driven_feed", s.driven_feed);

    std::string kind = "chu";
    rd.string("receiver.kind", kind);
    if (kind == "chu") s.receiver_kind = ReceiverKind::chu_loop;
    else if (kind == "hertzian") s.receiver_kind = ReceiverKind::hertzian_loop;
    else rd.fail("receiver.kind", "must be \"chu\" or \"hertzian\"", rd.node("receiver.kind"));
    rd.number("receiver.dipole_length", s.dipole_length);
    rd.number("receiver.chu_radius", s.chu_radius);

    rd.number("amplifier.source_resistance", s.amplifier.source_resistance);
    rd.number("amplifier.lna_input_resistance", s.amplifier.lna_input_resistance);
    rd.number("amplifier.lna_gain_beta", s.amplifier.lna_gain_beta);
    rd.number("amplifier.noise_figure", s.amplifier.noise_figure);
    rd.number("amplifier.temperature", s.amplifier.temperature);

    rd.number("budget.total_generator_power", s.budget.total_generator_power);

    rd.number("numerics.alpha_max_multiplier", s.numerics.alpha_max_multiplier);
    rd.integer("numerics.l_max", s.numerics.l_max);
    rd.integer("numerics.grid_size", s.numerics.grid_size);
    rd.number("numerics.field_rel_tol", s.numerics.field_rel_tol);
    rd.number("numerics.field_tail_bound", s.numerics.field_tail_bound);

    std::string sweep = "se_map";
    rd.string("sweep.kind", sweep);
    if (sweep == "se_map") s.sweep = SweepKind::se_map;
    else if (sweep == "spacing_study") s.sweep = SweepKind::spacing_study;
    else if (sweep == "two_user_trajectory") s.sweep = SweepKind::two_user_trajectory;
    else rd.fail("sweep.kind", "must be se_map, spacing_study or two_user_trajectory", rd.node("sweep.kind"));
    rd.range("sweep.r", s.r_grid);
    rd.range("sweep.z", s.z_grid);
    rd.number_list("sweep.spacings", s.spacings);
    rd.number("sweep.fixed_user.r", s.fixed_r);
    rd.number("sweep.fixed_user.z", s.fixed_z);
    rd.number("sweep.moving_user.r", s.moving_r);
    rd.range("sweep.moving_user.z", s.moving_z);

    // Invariants, reported against the field that breaks them.
    rd.require(s.frequency_hz > 0.0 && std::isfinite(s.frequency_hz),
               s.normalized ? "medium.reference_frequency_hz" : "medium.frequency_hz", "must be positive and finite");
    rd.require(s.loss_delta >= 0.0 && s.loss_delta <= 1e-2, "medium.loss_delta", "must lie in [0, 1e-2]");
    rd.require(s.wire_radius > 0.0, "array.wire_radius", "must be > 0 (LineGeometry: wire_radius > 0)");
    rd.require(s.feed_spacing > s.wire_radius, "array.feed_spacing",
               "must exceed wire_radius (LineGeometry: feed_spacing > wire_radius)");
    rd.require(s.num_feeds >= 1 && s.num_feeds <= 4096, "array.num_feeds", "must lie in [1, 4096]");
    rd.require(s.driven_feed >= -1 && s.driven_feed < s.num_feeds, "array.driven_feed",
               "must index a feed (0..num_feeds-1), or -1 for the centre feed");
    rd.require(s.dipole_length > 0.0, "receiver.dipole_length", "must be > 0");
    rd.require(s.chu_radius > 0.0, "receiver.chu_radius", "must be > 0");
    rd.require(s.amplifier.source_resistance > 0.0, "amplifier.source_resistance", "must be > 0");
    rd.require(s.amplifier.lna_input_resistance > 0.0, "amplifier.lna_input_resistance", "must be > 0");
    rd.require(s.amplifier.lna_gain_beta > 0.0, "amplifier.lna_gain_beta", "must be > 0");
    rd.require(s.amplifier.noise_figure >= 1.0, "amplifier.noise_figure", "must be >= 1 (linear)");
    rd.require(s.amplifier.temperature > 0.0, "amplifier.temperature", "must be > 0");
    rd.require(s.budget.total_generator_power > 0.0 && std::isfinite(s.budget.total_generator_power),
               "budget.total_generator_power", "must be positive and finite");
    rd.require(s.numerics.alpha_max_multiplier >= 2.0, "numerics.alpha_max_multiplier", "must be >= 2");
    rd.require(s.numerics.l_max >= 0, "numerics.l_max", "must be >= 0 (0 selects the default)");
    rd.require(s.numerics.grid_size == 0 ||
                   (std::has_single_bit(s.numerics.grid_size) &&
                    s.numerics.grid_size >= 64u * static_cast<std::size_t>(std::max(s.num_feeds, 1))),
               "numerics.grid_size", "must be 0 or a power of two >= 64 num_feeds");
    rd.require(s.numerics.field_rel_tol > 0.0 && s.numerics.field_rel_tol < 1e-2, "numerics.field_rel_tol",
               "must lie in (0, 1e-2)");
    rd.require(s.numerics.field_tail_bound > 0.0 && s.numerics.field_tail_bound < 1.0, "numerics.field_tail_bound",
               "must lie in (0, 1)");

    auto outside_wire = [&](double r, std::string_view path) {
        rd.require(r > s.wire_radius, path, "receiver must lie outside the wire (r > wire_radius)");
    };
    if (s.sweep != SweepKind::two_user_trajectory) outside_wire(s.r_grid.start, "sweep.r");
    if (s.sweep == SweepKind::spacing_study) {
        rd.require(!s.spacings.empty(), "sweep.spacings", "spacing_study needs at least one spacing");
        for (double d : s.spacings) rd.require(d > s.wire_radius, "sweep.spacings", "every spacing must exceed wire_radius");
    }
    if (s.sweep == SweepKind::two_user_trajectory) {
        outside_wire(s.fixed_r, "sweep.fixed_user.r");
        outside_wire(s.moving_r, "sweep.moving_user.r");
    }

    if (!rd.diagnostics.empty()) throw config_error(rd.diagnostics);
    return s;
}

}  // namespace connarray
