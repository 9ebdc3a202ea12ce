// connarray-sim: scenario-driven sweeps over the connected wire array model.
//
// Exit codes: 0 ok, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "connarray/noise_mc.hpp"
#include "connarray/scenario.hpp"
#include "connarray/sweeps.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace connarray;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kOk = 0, kConfigError = 2, kNumericError = 3;

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error({path + ": cannot open config file"});
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Shortest text that round-trips the double; fixed, so output is byte-stable.
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Every knob that affects numerical output, after defaults are resolved.
json numeric_echo(const Scenario& sc, const std::string& verb) {
    const Medium med = sc.medium();
    json j;
    j["verb"] = verb;
    j["name"] = sc.name;
    j["medium"] = {{"mode", sc.normalized ? "normalized" : "physical"},
                   {"frequency_hz", sc.frequency_hz},
                   {"wavelength_m", med.wavelength()},
                   {"loss_delta", sc.loss_delta},
                   {"impedance_ohm", med.impedance()},
                   {"length_unit_m", sc.length_unit()}};
    j["array"] = {{"wire_radius", sc.wire_radius},
                  {"feed_spacing", sc.feed_spacing},
                  {"num_feeds", sc.num_feeds},
                  {"driven_feed", sc.driven()},
                  {"feed_positions", "centred on z = 0"}};
    j["receiver"] = {{"kind", sc.receiver_kind == ReceiverKind::chu_loop ? "chu" : "hertzian"},
                     {"dipole_length", sc.dipole_length},
                     {"chu_radius", sc.chu_radius}};
    j["amplifier"] = {{"source_resistance", sc.amplifier.source_resistance},
                      {"lna_input_resistance", sc.amplifier.lna_input_resistance},
                      {"lna_gain_beta", sc.amplifier.lna_gain_beta},
                      {"noise_figure", sc.amplifier.noise_figure},
                      {"temperature", sc.amplifier.temperature},
                      {"boltzmann", sc.amplifier.boltzmann}};
    j["budget"] = {{"total_generator_power", sc.budget.total_generator_power}};
    json spac = json::array();
    for (double d : sc.spacings) spac.push_back(d);
    std::vector<double> spacing_list = sc.sweep == SweepKind::spacing_study ? sc.spacings
                                                                            : std::vector<double>{sc.feed_spacing};
    json lmax = json::array();
    for (double d : spacing_list) lmax.push_back(sc.l_max(sc.geometry(d)));
    j["numerics"] = {{"alpha_max_multiplier", sc.numerics.alpha_max_multiplier},
                     {"alpha_max_per_m", default_alpha_max(med, sc.numerics.alpha_max_multiplier)},
                     {"l_max", lmax},
                     {"grid_size", sc.grid_size()},
                     {"field_rel_tol", sc.numerics.field_rel_tol},
                     {"field_tail_bound", sc.numerics.field_tail_bound},
                     {"spectral_rel_tol", 1e-10},
                     {"gk_rule", "Gauss-Kronrod 7-15"},
                     {"max_condition", detail::max_condition},
                     {"whitening_floor", 1e-15},
                     {"tail_acceleration", "none"}};
    j["sweep"] = {{"kind", to_string(sc.sweep)},
                  {"r", {{"start", sc.r_grid.start}, {"stop", sc.r_grid.stop}, {"step", sc.r_grid.step}}},
                  {"z", {{"start", sc.z_grid.start}, {"stop", sc.z_grid.stop}, {"step", sc.z_grid.step}}},
                  {"spacings", spac},
                  {"fixed_user", {{"r", sc.fixed_r}, {"z", sc.fixed_z}}},
                  {"moving_user",
                   {{"r", sc.moving_r},
                    {"z", {{"start", sc.moving_z.start}, {"stop", sc.moving_z.stop}, {"step", sc.moving_z.step}}}}}};
    return j;
}

json versions() {
    return {{"connarray-sim", kVersion},
            {"compiler", __VERSION__},
            {"cplusplus", __cplusplus},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"tomlplusplus", std::to_string(TOML_LIB_MAJOR) + "." + std::to_string(TOML_LIB_MINOR) + "." +
                                 std::to_string(TOML_LIB_PATCH)},
            {"cli11", CLI11_VERSION},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"openssl", OPENSSL_VERSION_TEXT}};
}

struct Options {
    std::string config;
    std::string out = ".";
    unsigned threads = 1;
    std::uint64_t seed = 0;
    std::size_t noise_draws = 0;
};

/// One run: the manifest JSON plus the data files it owns.
class Run {
public:
    Run(const Options& opt, std::string verb, std::string stem)
        : opt_(opt), verb_(std::move(verb)), stem_(std::move(stem)), start_(std::chrono::steady_clock::now()) {
        config_text_ = read_file(opt.config);
        scenario_ = parse_scenario(config_text_, opt.config);
        echo_ = numeric_echo(scenario_, verb_);
        // The identity hash covers only what determines the data, so repeated
        // runs (any thread count) produce byte-identical CSV files.
        manifest_hash_ = sha256_hex(sha256_hex(config_text_) + "\n" + echo_.dump() + "\n" + kVersion);
        ctx_.threads = opt.threads;
    }

    const Scenario& scenario() const { return scenario_; }
    RunContext& ctx() { return ctx_; }

    std::string length_units() const { return scenario_.normalized ? "wavelengths" : "metres"; }

    void write_csv(const std::string& suffix, const std::string& columns, const std::string& units,
                   const std::vector<std::string>& lines) {
        fs::create_directories(opt_.out);
        const fs::path path = fs::path(opt_.out) / (stem_ + suffix + ".csv");
        std::ofstream f(path, std::ios::binary);
        f << "# connarray-sim " << verb_ << "\n";
        f << "# manifest: " << stem_ << ".manifest.json\n";
        f << "# manifest_hash: " << manifest_hash_ << "\n";
        f << "# config_sha256: " << sha256_hex(config_text_) << "\n";
        f << "# units: " << units << "\n";
        f << columns << "\n";
        for (const auto& l : lines) f << l << "\n";
        if (!f) throw std::runtime_error("cannot write " + path.string());
        files_.push_back(path.filename().string());
    }

    void finish(json extra = json::object()) {
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        json m;
        m["manifest_hash"] = manifest_hash_;
        m["config_path"] = opt_.config;
        m["config_sha256"] = sha256_hex(config_text_);
        m["parameters"] = echo_;
        m["versions"] = versions();
        m["threads"] = opt_.threads;
        m["seed"] = opt_.seed;
        m["wall_time_s"] = wall;
        m["data_files"] = files_;
        m["max_rn_asymmetry"] = ctx_.max_rn_asymmetry;
        m["warnings"] = ctx_.log.warnings;
        for (auto& [k, v] : extra.items()) m[k] = v;
        fs::create_directories(opt_.out);
        std::ofstream f(fs::path(opt_.out) / (stem_ + ".manifest.json"), std::ios::binary);
        f << m.dump(2) << "\n";
        for (const auto& w : ctx_.log.warnings) std::cerr << "warning: " << w << "\n";
    }

private:
    Options opt_;
    std::string verb_, stem_;
    std::chrono::steady_clock::time_point start_;
    std::string config_text_;
    Scenario scenario_;
    json echo_;
    std::string manifest_hash_;
    RunContext ctx_;
    std::vector<std::string> files_;
};

int cmd_validate(const Options& opt) {
    const Scenario sc = parse_scenario(read_file(opt.config), opt.config);
    const LineGeometry geom = sc.geometry();
    geom.validate();
    std::cout << opt.config << ": ok (" << to_string(sc.sweep) << ", N = " << sc.num_feeds << ", l_max = "
              << sc.l_max(geom) << ", grid " << sc.grid_size() << ")\n";
    if (opt.noise_draws > 0) {
        // Noise model self-check on the scenario's first receiver.
        RunContext ctx;
        const ArrayModel arr = build_array(sc);
        const double r = sc.sweep == SweepKind::two_user_trajectory ? sc.fixed_r : sc.r_grid.start;
        const double z = sc.sweep == SweepKind::two_user_trajectory ? sc.fixed_z : sc.z_grid.start;
        std::vector<ReceiverSpec> users{sc.receiver(r, z)};
        const Eigen::MatrixXcd hrt = build_hrt(users, arr.geom, arr.med, arr.zt, sc.field_numerics(), &ctx.log);
        Eigen::MatrixXcd yr(1, 1);
        yr(0, 0) = receiver_admittance(users[0], arr.med);
        const NoiseCheck chk =
            noise_monte_carlo(assemble_gmimo(arr.zt, yr, hrt), sc.amplifier, opt.noise_draws, opt.seed);
        std::cout << "noise check: " << chk.draws << " draws, seed " << opt.seed << ", max |z| = " << chk.max_z
                  << "\n";
        if (chk.max_z > 4.0) throw model_error("noise Monte-Carlo check outside 4 sigma");
    }
    return kOk;
}

int cmd_se_map(const Options& opt) {
    Run run(opt, "se-map", "se_map");
    const auto rows = run_se_map(run.scenario(), run.ctx());
    const bool study = run.scenario().sweep == SweepKind::spacing_study;
    std::vector<std::string> lines;
    for (const auto& r : rows)
        lines.push_back((study ? num(r.spacing) + "," : std::string()) + num(r.r) + "," + num(r.z) + "," +
                        num(r.se_bits));
    run.write_csv("", study ? "spacing,r,z,se_bits" : "r,z,se_bits",
                  "spacing,r,z in " + run.length_units() + "; se_bits in bits/s/Hz", lines);
    run.finish();
    return kOk;
}

int cmd_two_user(const Options& opt) {
    Run run(opt, "two-user", "two_user");
    if (run.scenario().sweep != SweepKind::two_user_trajectory)
        throw config_error({"sweep.kind: two-user needs two_user_trajectory"});
    const auto rows = run_two_user(run.scenario(), run.ctx());
    std::vector<std::string> lines;
    for (const auto& r : rows) lines.push_back(num(r.z2) + "," + num(r.rate_user1) + "," + num(r.rate_user2));
    run.write_csv("", "z2,rate_user1,rate_user2", "z2 in " + run.length_units() + "; rates in bits/s/Hz", lines);
    run.finish();
    return kOk;
}

int cmd_impedance(const Options& opt) {
    Run run(opt, "impedance", "impedance");
    const ArrayModel arr = build_array(run.scenario());
    const double z0 = arr.med.impedance();
    std::vector<std::string> lines;
    for (std::size_t m = 0; m < arr.kernel.kernel.size(); ++m) {
        const cplx z = arr.kernel.kernel[m];
        lines.push_back(std::to_string(m) + "," + num(z.real()) + "," + num(z.imag()) + "," + num(z.real() / z0) +
                        "," + num(z.imag() / z0));
    }
    run.write_csv("_kernel", "m,re_zd_ohm,im_zd_ohm,re_zd_over_z0,im_zd_over_z0", "ohms and ohms/Z0", lines);
    lines.clear();
    for (Eigen::Index r = 0; r < arr.zt.rows(); ++r)
        for (Eigen::Index c = 0; c < arr.zt.cols(); ++c)
            lines.push_back(std::to_string(r) + "," + std::to_string(c) + "," + num(arr.zt(r, c).real()) + "," +
                            num(arr.zt(r, c).imag()));
    run.write_csv("_zt", "row,col,re_ohm,im_ohm", "ohms", lines);
    run.finish({{"l_max_used", arr.l_max}, {"grid_size_used", arr.grid_size}});
    return kOk;
}

int cmd_fields(const Options& opt) {
    Run run(opt, "fields", "fields");
    const auto rows = run_fields(run.scenario(), run.ctx());
    std::vector<std::string> lines;
    for (const auto& r : rows)
        lines.push_back(num(r.r) + "," + num(r.z) + "," + num(r.h_phi.real()) + "," + num(r.h_phi.imag()) + "," +
                        num(std::abs(r.h_phi)));
    run.write_csv("", "r,z,re_h_phi,im_h_phi,abs_h_phi",
                  "r,z in " + run.length_units() + "; H_phi in A/m per ampere at the driven feed, others open",
                  lines);
    run.finish();
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Connected wire array near-field MIMO simulator"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--config", opt.config, "Scenario TOML file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", opt.out, "Output directory")->capture_default_str();
    app.add_option("--threads", opt.threads, "Worker threads for sweep points")->check(CLI::Range(1u, 1024u));
    app.add_option("--seed", opt.seed, "RNG seed for the Monte-Carlo noise check");

    auto* validate = app.add_subcommand("validate", "Check a config without running a sweep");
    validate->add_option("--noise-draws", opt.noise_draws, "Also run a Monte-Carlo noise check with this many draws");
    app.add_subcommand("se-map", "Spectral-efficiency map of a single excited feed");
    app.add_subcommand("two-user", "Two-user LMMSE rates along a trajectory");
    app.add_subcommand("impedance", "Dump the impedance kernel z_d and Z_T");
    app.add_subcommand("fields", "Dump the H_phi grid of the driven feed");
    app.fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    const std::string verb = app.get_subcommands().front()->get_name();
    try {
        if (verb == "validate") return cmd_validate(opt);
        if (verb == "se-map") return cmd_se_map(opt);
        if (verb == "two-user") return cmd_two_user(opt);
        if (verb == "impedance") return cmd_impedance(opt);
        if (verb == "fields") return cmd_fields(opt);
    } catch (const config_error& e) {
        for (const auto& d : e.diagnostics()) std::cerr << "config error: " << d << "\n";
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumericError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericError;
    }
    return kConfigError;
}
