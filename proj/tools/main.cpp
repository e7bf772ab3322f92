// sqz: command-line front end for the squeezed-vacuum analysis library.
//
// Subcommands: analyze, fock, wigner, spectrum {eval|fit|bandwidth|rate},
// simulate. Every subcommand accepts --config <json> whose values are
// overridden by explicit flags. Human-facing units are dB and Hz here;
// the library works in linear variances.
//
// Exit codes: 0 success, 2 validation/config errors, 3 numerical-convergence
// failures, 1 anything else.

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sqz/errors.hpp"
#include "sqz/fock.hpp"
#include "sqz/gaussian.hpp"
#include "sqz/homodyne.hpp"
#include "sqz/io.hpp"
#include "sqz/presets.hpp"
#include "sqz/spectrum.hpp"
#include "sqz/wigner.hpp"

namespace {

constexpr const char* kToolVersion = "0.1.0";

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
using Meta = std::vector<std::pair<std::string, std::string>>;

std::string fmt(double v) { return sqz::io::format_double(v); }

double nan_default() { return std::numeric_limits<double>::quiet_NaN(); }

sqz::Convention parse_convention(const std::string& name) {
    if (name == "quarter") return sqz::Convention::Quarter;
    if (name == "half") return sqz::Convention::Half;
    if (name == "unity") return sqz::Convention::Unity;
    throw sqz::validation_error("unknown convention '" + name +
                                "' (expected quarter, half, or unity)");
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sqz::validation_error("cannot open config file: " + path);
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::parse_error& e) {
        throw sqz::validation_error("config " + path + " is not valid JSON: " + e.what());
    }
    if (!cfg.is_object()) throw sqz::validation_error("config " + path + " must be a JSON object");
    return cfg;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw sqz::validation_error("cannot open for writing: " + path);
    out << content;
    if (!out.good()) throw sqz::validation_error("write failed: " + path);
}

// Pull `key` from the config when the flag was not given on the command line.
template <typename T>
void cfg_override(const CLI::App& cmd, const std::string& flag, const json& cfg,
                  const std::string& key, T& var) {
    if (cmd.count(flag) > 0) return;
    auto it = cfg.find(key);
    if (it == cfg.end()) return;
    try {
        var = it->get<T>();
    } catch (const json::exception&) {
        throw sqz::validation_error("config field '" + key + "' has the wrong type");
    }
}

struct CommonOpts {
    std::string config_path;
    bool provenance = false;
    json cfg = json::object();

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file; flags override its values");
        cmd->add_flag("--provenance", provenance,
                      "add generator/command/timestamp metadata to output headers");
    }
    void load() {
        if (!config_path.empty()) cfg = load_config(config_path);
    }
};

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

// Output headers carry no timestamps by default so identical runs produce
// byte-identical files; --provenance opts into these extra lines.
void add_provenance(Meta& meta, const CommonOpts& common, const std::string& command) {
    if (!common.provenance) return;
    meta.emplace_back("generator", std::string("sqz ") + kToolVersion);
    meta.emplace_back("command", command);
    meta.emplace_back("generated_at", utc_timestamp());
}

void add_provenance(ordered_json& doc, const CommonOpts& common, const std::string& command) {
    if (!common.provenance) return;
    ordered_json p;
    p["generator"] = std::string("sqz ") + kToolVersion;
    p["command"] = command;
    p["generated_at"] = utc_timestamp();
    doc["provenance"] = std::move(p);
}

// --- state selection shared by fock / wigner ---------------------------------

struct StateOpts {
    double v1_db = nan_default();
    double v2_db = nan_default();
    std::string convention = "unity";
    std::string preset;
    std::size_t state_index = 0;

    void attach(CLI::App* cmd, const std::string& default_convention) {
        convention = default_convention;
        cmd->add_option("--v1-db", v1_db, "squeezed-quadrature variance, dB relative to vacuum");
        cmd->add_option("--v2-db", v2_db, "anti-squeezed-quadrature variance, dB relative to vacuum");
        cmd->add_option("--convention", convention,
                        "variance normalization: quarter, half, or unity (default " +
                            default_convention + ")");
        cmd->add_option("--preset", preset, "named parameter bundle ('published')");
        cmd->add_option("--state-index", state_index, "which preset state to use (0-based)");
    }

    sqz::GaussianState resolve(const CLI::App& cmd, const json& cfg,
                               const std::vector<sqz::GaussianState>& preset_states) const {
        double a = v1_db;
        double b = v2_db;
        std::string conv = convention;
        if (auto it = cfg.find("state"); it != cfg.end()) {
            if (!it->is_object())
                throw sqz::validation_error("config field 'state' must be an object");
            const json& st = *it;
            if (cmd.count("--v1-db") == 0 && st.contains("v1_db")) a = st.at("v1_db").get<double>();
            if (cmd.count("--v2-db") == 0 && st.contains("v2_db")) b = st.at("v2_db").get<double>();
            if (cmd.count("--convention") == 0 && st.contains("convention"))
                conv = st.at("convention").get<std::string>();
        }
        std::string pn = preset;
        std::size_t idx = state_index;
        cfg_override(cmd, "--preset", cfg, "preset", pn);
        cfg_override(cmd, "--state-index", cfg, "state_index", idx);
        if (!pn.empty()) {
            if (pn != "published")
                throw sqz::validation_error("unknown preset '" + pn + "' (expected 'published')");
            if (idx >= preset_states.size())
                throw sqz::validation_error("state-index " + std::to_string(idx) +
                                            " out of range (preset has " +
                                            std::to_string(preset_states.size()) + " states)");
            // dB values are vacuum-relative, hence identical in every convention.
            if (std::isnan(a)) a = preset_states[idx].v1_db();
            if (std::isnan(b)) b = preset_states[idx].v2_db();
        }
        if (std::isnan(a) || std::isnan(b))
            throw sqz::validation_error(
                "state required: give --v1-db/--v2-db, a config 'state' block, or --preset");
        return sqz::GaussianState::from_db(a, b, parse_convention(conv));
    }
};

// --- spectrum-model selection -------------------------------------------------

struct ModelOpts {
    double pump = nan_default();
    double eta = nan_default();
    double kappa = nan_default();
    std::string preset;

    void attach(CLI::App* cmd) {
        cmd->add_option("--pump-ratio", pump, "pump power over threshold power, in [0, 1)");
        cmd->add_option("--eta-gamma", eta, "combined detection-and-escape efficiency, in (0, 1]");
        cmd->add_option("--kappa", kappa, "cavity decay rate, rad/s");
        cmd->add_option("--preset", preset, "named parameter bundle ('published')");
    }

    sqz::SpectrumModel resolve(const CLI::App& cmd, const json& cfg) const {
        double p = pump;
        double e = eta;
        double k = kappa;
        cfg_override(cmd, "--pump-ratio", cfg, "pump_ratio", p);
        cfg_override(cmd, "--eta-gamma", cfg, "eta_gamma", e);
        cfg_override(cmd, "--kappa", cfg, "kappa", k);
        std::string pn = preset;
        cfg_override(cmd, "--preset", cfg, "preset", pn);
        std::optional<sqz::CavityGeometry> geom;
        if (!pn.empty()) {
            if (pn != "published")
                throw sqz::validation_error("unknown preset '" + pn + "' (expected 'published')");
            const sqz::SpectrumModel& ps = sqz::published_preset().spectrum;
            if (std::isnan(p)) p = ps.pump_ratio();
            if (std::isnan(e)) e = ps.eta_gamma();
            if (std::isnan(k)) {
                k = ps.kappa();
                geom = ps.geometry();
            }
        }
        if (std::isnan(p))
            throw sqz::validation_error("pump_ratio is required (flag, config, or preset)");
        if (std::isnan(e))
            throw sqz::validation_error("eta_gamma is required (flag, config, or preset)");
        if (std::isnan(k))
            throw sqz::validation_error("kappa is required (flag, config, or preset)");
        return sqz::SpectrumModel(p, e, k, geom);
    }
};

void add_model_metadata(Meta& meta, const sqz::SpectrumModel& model) {
    meta.emplace_back("pump_ratio", fmt(model.pump_ratio()));
    meta.emplace_back("eta_gamma", fmt(model.eta_gamma()));
    meta.emplace_back("kappa", fmt(model.kappa()));
}

// --- analyze -------------------------------------------------------------------

std::vector<std::pair<double, double>> parse_pairs_string(const std::string& text) {
    std::vector<std::pair<double, double>> pairs;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        auto colon = token.find(':');
        std::size_t idx = pairs.size();
        if (colon == std::string::npos)
            throw sqz::validation_error("pair " + std::to_string(idx) +
                                        ": expected '<squeezing_db>:<antisqueezing_db>', got '" +
                                        token + "'");
        try {
            double s = std::stod(token.substr(0, colon));
            double a = std::stod(token.substr(colon + 1));
            pairs.emplace_back(s, a);
        } catch (const std::exception&) {
            throw sqz::validation_error("pair " + std::to_string(idx) +
                                        ": cannot parse numbers in '" + token + "'");
        }
    }
    if (pairs.empty()) throw sqz::validation_error("--pairs given but no pairs parsed");
    return pairs;
}

std::vector<std::pair<double, double>> pairs_from_csv(const std::string& path) {
    const sqz::io::CsvTable table = sqz::io::read_csv_file(path);
    std::size_t col_s = table.columns.size();
    std::size_t col_a = table.columns.size();
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (table.columns[i] == "squeezing_db" || table.columns[i] == "v1_db") col_s = i;
        if (table.columns[i] == "antisqueezing_db" || table.columns[i] == "v2_db") col_a = i;
    }
    if (col_s == table.columns.size() || col_a == table.columns.size())
        throw sqz::validation_error(
            path + ": need columns squeezing_db/antisqueezing_db (or v1_db/v2_db)");
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(table.rows.size());
    for (const auto& row : table.rows) pairs.emplace_back(row[col_s], row[col_a]);
    return pairs;
}

int run_analyze(const CLI::App& cmd, CommonOpts& common, const std::string& pairs_str,
                const std::string& input_path, const std::string& preset_name,
                const std::string& output_path) {
    common.load();
    std::vector<std::pair<double, double>> pairs_db;
    std::string preset = preset_name;
    cfg_override(cmd, "--preset", common.cfg, "preset", preset);
    if (cmd.count("--pairs") > 0) {
        pairs_db = parse_pairs_string(pairs_str);
    } else if (cmd.count("--input") > 0) {
        pairs_db = pairs_from_csv(input_path);
    } else if (auto it = common.cfg.find("pairs"); it != common.cfg.end()) {
        for (const auto& entry : *it) {
            if (!entry.is_array() || entry.size() != 2)
                throw sqz::validation_error("config 'pairs' entries must be [squeezing_db, "
                                            "antisqueezing_db] arrays");
            pairs_db.emplace_back(entry[0].get<double>(), entry[1].get<double>());
        }
        if (pairs_db.empty())
            throw sqz::validation_error("config 'pairs' must not be empty");
    }

    std::vector<sqz::GaussianState> states;
    if (pairs_db.empty() && cmd.count("--pairs") == 0 && cmd.count("--input") == 0) {
        if (!preset.empty()) {
            if (preset != "published")
                throw sqz::validation_error("unknown preset '" + preset +
                                            "' (expected 'published')");
            // Use the preset states directly; a dB round trip would perturb
            // them by an ulp.
            states = sqz::published_preset().measured_states;
        } else {
            throw sqz::validation_error("no input: give --pairs, --input, a config, or --preset");
        }
    }

    states.reserve(std::max(states.size(), pairs_db.size()));
    for (const auto& [s_db, a_db] : pairs_db)
        states.push_back(sqz::GaussianState::from_db(s_db, a_db, sqz::Convention::Unity));

    const sqz::LossInference inf = sqz::infer_loss(states);

    std::cout << "pairs: " << states.size() << "\n";
    std::cout << "eta_gamma: " << fmt(inf.loss.eta_gamma) << "\n";
    std::cout << "one_minus_eta_gamma: " << fmt(1.0 - inf.loss.eta_gamma) << "\n";
    std::cout << "objective_residual: " << fmt(inf.residual) << "\n";

    ordered_json rep;
    rep["pairs"] = states.size();
    rep["eta_gamma"] = inf.loss.eta_gamma;
    rep["one_minus_eta_gamma"] = 1.0 - inf.loss.eta_gamma;
    rep["objective_residual"] = inf.residual;
    rep["states"] = ordered_json::array();
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double pur = sqz::purity(states[i]);
        const double nbar = sqz::mean_photon_number(states[i]);
        const double p1_db = sqz::linear_to_db(inf.pure_pairs[i].first);
        const double p2_db = sqz::linear_to_db(inf.pure_pairs[i].second);
        std::cout << "state " << i << ": observed " << fmt(states[i].v1_db()) << " / "
                  << fmt(states[i].v2_db()) << " dB; purity " << fmt(pur) << "; mean_photon "
                  << fmt(nbar) << "; pure " << fmt(p1_db) << " / " << fmt(p2_db) << " dB\n";
        ordered_json st;
        st["observed_v1_db"] = states[i].v1_db();
        st["observed_v2_db"] = states[i].v2_db();
        st["purity"] = pur;
        st["mean_photon"] = nbar;
        st["pure_v1_db"] = p1_db;
        st["pure_v2_db"] = p2_db;
        rep["states"].push_back(std::move(st));
    }
    if (!output_path.empty()) {
        add_provenance(rep, common, "analyze");
        write_text_file(output_path, rep.dump(2) + "\n");
    }
    return 0;
}

// --- fock -----------------------------------------------------------------------

int run_fock(const CLI::App& cmd, CommonOpts& common, const StateOpts& state_opts,
             std::size_t truncation, bool want_normalized, bool verify_oracle,
             std::size_t oracle_workspace, const std::string& output_base,
             const std::string& format) {
    common.load();
    std::size_t trunc = truncation;
    cfg_override(cmd, "--truncation", common.cfg, "truncation", trunc);
    const sqz::GaussianState state =
        state_opts.resolve(cmd, common.cfg, sqz::published_preset().matrix_states);

    sqz::DensityMatrix dm = sqz::density_matrix(state, trunc);
    const double raw_deficit = dm.trace_deficit;
    const bool raw_warning = dm.truncation_warning;

    std::optional<double> oracle_dev;
    if (verify_oracle) {
        const sqz::DensityMatrix od = sqz::oracle_density_matrix(state, trunc, oracle_workspace);
        double mx = 0.0;
        for (std::size_t i = 0; i < dm.entries.size(); ++i)
            mx = std::max(mx, std::abs(dm.entries[i] - od.entries[i]));
        oracle_dev = mx;
    }
    if (want_normalized) dm = sqz::normalized(dm);
    const sqz::PhotonDistribution pd = sqz::photon_distribution(dm);

    std::cout << "v1_db: " << fmt(state.v1_db()) << "\n";
    std::cout << "v2_db: " << fmt(state.v2_db()) << "\n";
    std::cout << "truncation: " << trunc << "\n";
    std::cout << "trace: " << fmt(dm.trace()) << "\n";
    std::cout << "trace_deficit: " << fmt(raw_deficit) << "\n";
    std::cout << "truncation_warning: " << (raw_warning ? "true" : "false") << "\n";
    std::cout << "normalized: " << (want_normalized ? "true" : "false") << "\n";
    if (pd.probabilities.size() > 0) std::cout << "p0: " << fmt(pd.probabilities[0]) << "\n";
    if (pd.probabilities.size() > 1) std::cout << "p1: " << fmt(pd.probabilities[1]) << "\n";
    if (oracle_dev) std::cout << "oracle_max_abs_deviation: " << fmt(*oracle_dev) << "\n";

    if (output_base.empty()) return 0;

    Meta meta;
    add_provenance(meta, common, "fock");
    meta.emplace_back("v1_db", fmt(state.v1_db()));
    meta.emplace_back("v2_db", fmt(state.v2_db()));
    meta.emplace_back("convention", sqz::convention_name(state.convention()));
    meta.emplace_back("truncation", std::to_string(trunc));
    meta.emplace_back("trace_deficit", fmt(raw_deficit));
    meta.emplace_back("normalized", want_normalized ? "1" : "0");
    if (oracle_dev) meta.emplace_back("oracle_max_abs_deviation", fmt(*oracle_dev));

    if (format == "json") {
        ordered_json doc;
        add_provenance(doc, common, "fock");
        doc["state"] = {{"v1_db", state.v1_db()},
                        {"v2_db", state.v2_db()},
                        {"convention", sqz::convention_name(state.convention())}};
        doc["truncation"] = trunc;
        doc["trace_deficit"] = raw_deficit;
        doc["truncation_warning"] = raw_warning;
        doc["normalized"] = want_normalized;
        if (oracle_dev) doc["oracle_max_abs_deviation"] = *oracle_dev;
        ordered_json entries = ordered_json::array();
        for (std::size_t m = 0; m < dm.dim; ++m)
            for (std::size_t n = 0; n < dm.dim; ++n)
                if (dm.at(m, n) != 0.0) entries.push_back({m, n, dm.at(m, n)});
        doc["entries"] = std::move(entries);
        doc["pn"] = pd.probabilities;
        write_text_file(output_base + ".json", doc.dump(2) + "\n");
        std::cout << "wrote: " << output_base << ".json\n";
        return 0;
    }
    if (format != "csv")
        throw sqz::validation_error("unknown format '" + format + "' (expected csv or json)");

    sqz::io::CsvTable matrix;
    matrix.metadata = meta;
    matrix.columns = {"row", "col", "value"};
    for (std::size_t m = 0; m < dm.dim; ++m)
        for (std::size_t n = 0; n < dm.dim; ++n)
            if (dm.at(m, n) != 0.0)
                matrix.rows.push_back({static_cast<double>(m), static_cast<double>(n), dm.at(m, n)});
    sqz::io::write_csv_file(output_base + "_matrix.csv", matrix);

    sqz::io::CsvTable pn;
    pn.metadata = meta;
    pn.columns = {"n", "probability"};
    for (std::size_t n = 0; n < pd.probabilities.size(); ++n)
        pn.rows.push_back({static_cast<double>(n), pd.probabilities[n]});
    sqz::io::write_csv_file(output_base + "_pn.csv", pn);

    std::cout << "wrote: " << output_base << "_matrix.csv\n";
    std::cout << "wrote: " << output_base << "_pn.csv\n";
    return 0;
}

// --- wigner ----------------------------------------------------------------------

int run_wigner(const CLI::App& cmd, CommonOpts& common, const StateOpts& state_opts,
               double extent_sigmas, std::size_t points, const std::string& output_base) {
    common.load();
    double extent = extent_sigmas;
    std::size_t pts = points;
    cfg_override(cmd, "--extent-sigmas", common.cfg, "extent_sigmas", extent);
    cfg_override(cmd, "--points", common.cfg, "points", pts);
    const sqz::GaussianState state =
        state_opts.resolve(cmd, common.cfg, sqz::published_preset().matrix_states);

    const sqz::WignerGrid grid = sqz::wigner_eval(state, sqz::GridSpec{extent, pts});
    const double integral = grid.integral();
    const double peak = sqz::wigner_value(state, 0.0, 0.0);
    const std::vector<double> m1 = grid.marginal_x1();
    const std::vector<double> m2 = grid.marginal_x2();
    const double var1 = sqz::density_variance(grid.x1_axis, m1, grid.dx1);
    const double var2 = sqz::density_variance(grid.x2_axis, m2, grid.dx2);

    std::cout << "v1_db: " << fmt(state.v1_db()) << "\n";
    std::cout << "v2_db: " << fmt(state.v2_db()) << "\n";
    std::cout << "convention: " << sqz::convention_name(state.convention()) << "\n";
    std::cout << "integral: " << fmt(integral) << "\n";
    std::cout << "peak: " << fmt(peak) << "\n";
    std::cout << "marginal_variance_x1: " << fmt(var1) << "\n";
    std::cout << "marginal_variance_x2: " << fmt(var2) << "\n";

    if (output_base.empty()) return 0;

    Meta meta;
    add_provenance(meta, common, "wigner");
    meta.emplace_back("v1_db", fmt(state.v1_db()));
    meta.emplace_back("v2_db", fmt(state.v2_db()));
    meta.emplace_back("convention", sqz::convention_name(state.convention()));
    meta.emplace_back("extent_sigmas", fmt(extent));
    meta.emplace_back("points_per_axis", std::to_string(pts));
    meta.emplace_back("integral", fmt(integral));

    sqz::io::CsvTable gt;
    gt.metadata = meta;
    gt.columns = {"x1", "x2", "w"};
    gt.rows.reserve(pts * pts);
    for (std::size_t i = 0; i < grid.x1_axis.size(); ++i)
        for (std::size_t j = 0; j < grid.x2_axis.size(); ++j)
            gt.rows.push_back({grid.x1_axis[i], grid.x2_axis[j], grid.at(i, j)});
    sqz::io::write_csv_file(output_base + "_grid.csv", gt);

    sqz::io::CsvTable t1;
    t1.metadata = meta;
    t1.metadata.emplace_back("marginal_variance", fmt(var1));
    t1.columns = {"x1", "density"};
    for (std::size_t i = 0; i < grid.x1_axis.size(); ++i) t1.rows.push_back({grid.x1_axis[i], m1[i]});
    sqz::io::write_csv_file(output_base + "_marginal_x1.csv", t1);

    sqz::io::CsvTable t2;
    t2.metadata = meta;
    t2.metadata.emplace_back("marginal_variance", fmt(var2));
    t2.columns = {"x2", "density"};
    for (std::size_t j = 0; j < grid.x2_axis.size(); ++j) t2.rows.push_back({grid.x2_axis[j], m2[j]});
    sqz::io::write_csv_file(output_base + "_marginal_x2.csv", t2);

    std::cout << "wrote: " << output_base << "_grid.csv\n";
    std::cout << "wrote: " << output_base << "_marginal_x1.csv\n";
    std::cout << "wrote: " << output_base << "_marginal_x2.csv\n";
    return 0;
}

// --- spectrum eval / fit / bandwidth / rate ---------------------------------------

int run_spectrum_eval(const CLI::App& cmd, CommonOpts& common, const ModelOpts& model_opts,
                      double fmin, double fmax, std::size_t points,
                      const std::vector<double>& at, const std::string& output_path) {
    common.load();
    double lo = fmin;
    double hi = fmax;
    std::size_t n = points;
    cfg_override(cmd, "--fmin", common.cfg, "fmin", lo);
    cfg_override(cmd, "--fmax", common.cfg, "fmax", hi);
    cfg_override(cmd, "--points", common.cfg, "points", n);
    const sqz::SpectrumModel model = model_opts.resolve(cmd, common.cfg);

    if (!at.empty()) {
        std::cout << "f_hz,v1_db,v2_db\n";
        for (double f : at) {
            const auto [w1, w2] = sqz::model_variances(model, f);
            std::cout << fmt(f) << "," << fmt(sqz::linear_to_db(w1)) << ","
                      << fmt(sqz::linear_to_db(w2)) << "\n";
        }
    }
    if (output_path.empty()) return 0;

    if (!(hi > lo)) throw sqz::validation_error("fmax must exceed fmin");
    if (n < 2) throw sqz::validation_error("points must be >= 2");

    sqz::io::CsvTable table;
    add_provenance(table.metadata, common, "spectrum eval");
    add_model_metadata(table.metadata, model);
    table.columns = {"f_hz", "v1_db", "v2_db"};
    for (std::size_t i = 0; i < n; ++i) {
        const double f = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        const auto [w1, w2] = sqz::model_variances(model, f);
        table.rows.push_back({f, sqz::linear_to_db(w1), sqz::linear_to_db(w2)});
    }
    sqz::io::write_csv_file(output_path, table);
    std::cout << "wrote: " << output_path << "\n";
    return 0;
}

sqz::FitTarget parse_target(const std::string& name) {
    if (name == "v1") return sqz::FitTarget::V1Only;
    if (name == "v2") return sqz::FitTarget::V2Only;
    if (name == "joint") return sqz::FitTarget::Joint;
    throw sqz::validation_error("unknown fit target '" + name + "' (expected v1, v2, or joint)");
}

int run_spectrum_fit(const CLI::App& cmd, CommonOpts& common, const ModelOpts& model_opts,
                     const std::string& input_path, const std::string& target,
                     double rbw, const std::string& output_path) {
    common.load();
    std::string in_path = input_path;
    std::string tgt = target;
    double resolution = rbw;
    cfg_override(cmd, "--input", common.cfg, "input", in_path);
    cfg_override(cmd, "--target", common.cfg, "target", tgt);
    cfg_override(cmd, "--rbw", common.cfg, "resolution_bandwidth", resolution);
    if (in_path.empty()) throw sqz::validation_error("fit requires --input <csv>");
    const sqz::SpectrumModel init = model_opts.resolve(cmd, common.cfg);

    const sqz::io::CsvTable table = sqz::io::read_csv_file(in_path);
    std::size_t col_f = table.columns.size();
    std::size_t col_1 = table.columns.size();
    std::size_t col_2 = table.columns.size();
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (table.columns[i] == "f_hz") col_f = i;
        if (table.columns[i] == "v1_db") col_1 = i;
        if (table.columns[i] == "v2_db") col_2 = i;
    }
    if (col_f == table.columns.size())
        throw sqz::validation_error(in_path + ": need a column named f_hz");
    if (col_1 == table.columns.size() && col_2 == table.columns.size())
        throw sqz::validation_error(in_path + ": need a v1_db and/or v2_db column");

    sqz::SpectrumData data;
    data.resolution_bandwidth = std::isnan(resolution) ? 0.0 : resolution;
    for (const auto& row : table.rows) {
        data.frequencies.push_back(row[col_f]);
        if (col_1 != table.columns.size()) data.v1_obs.push_back(sqz::db_to_linear(row[col_1]));
        if (col_2 != table.columns.size()) data.v2_obs.push_back(sqz::db_to_linear(row[col_2]));
    }

    const sqz::FitResult result = sqz::fit_spectrum(data, init, parse_target(tgt));

    std::cout << "pump_ratio: " << fmt(result.model.pump_ratio()) << "\n";
    std::cout << "eta_gamma: " << fmt(result.model.eta_gamma()) << "\n";
    std::cout << "kappa: " << fmt(result.model.kappa()) << "\n";
    std::cout << "residual_db2: " << fmt(result.residual) << "\n";
    std::cout << "iterations: " << result.iterations << "\n";
    std::cout << "improved: " << (result.improved ? "true" : "false") << "\n";
    std::cout << "degenerate_warning: " << (result.degenerate_warning ? "true" : "false") << "\n";

    if (!output_path.empty()) {
        ordered_json rep;
        add_provenance(rep, common, "spectrum fit");
        rep["pump_ratio"] = result.model.pump_ratio();
        rep["eta_gamma"] = result.model.eta_gamma();
        rep["kappa"] = result.model.kappa();
        rep["residual_db2"] = result.residual;
        rep["iterations"] = result.iterations;
        rep["improved"] = result.improved;
        rep["degenerate_warning"] = result.degenerate_warning;
        write_text_file(output_path, rep.dump(2) + "\n");
        std::cout << "wrote: " << output_path << "\n";
    }
    if (!result.improved && result.residual > 1e-9) {
        std::cerr << "convergence error: fit could not improve on the initial guess (residual "
                  << fmt(result.residual) << ")\n";
        return 3;
    }
    return 0;
}

int run_spectrum_bandwidth(const CLI::App& cmd, CommonOpts& common, const ModelOpts& model_opts,
                           const std::string& output_path) {
    common.load();
    const sqz::SpectrumModel model = model_opts.resolve(cmd, common.cfg);
    const double bw = sqz::squeezing_bandwidth(model);
    std::cout << "bandwidth_hz: " << fmt(bw) << "\n";
    if (!output_path.empty()) {
        ordered_json rep;
        add_provenance(rep, common, "spectrum bandwidth");
        rep["bandwidth_hz"] = bw;
        write_text_file(output_path, rep.dump(2) + "\n");
        std::cout << "wrote: " << output_path << "\n";
    }
    return 0;
}

int run_spectrum_rate(const CLI::App& cmd, CommonOpts& common, const ModelOpts& model_opts,
                      double half_fsr, double bin_width, std::size_t truncation,
                      const std::string& output_base) {
    common.load();
    double span = half_fsr;
    double bw = bin_width;
    std::size_t trunc = truncation;
    cfg_override(cmd, "--half-fsr", common.cfg, "half_fsr", span);
    cfg_override(cmd, "--bin-width", common.cfg, "bin_width", bw);
    cfg_override(cmd, "--truncation", common.cfg, "truncation", trunc);
    std::string pn = model_opts.preset;
    cfg_override(cmd, "--preset", common.cfg, "preset", pn);
    if (!pn.empty() && pn == "published") {
        const sqz::PublishedPreset& p = sqz::published_preset();
        if (std::isnan(span)) span = p.half_fsr_hz;
        if (std::isnan(bw)) bw = p.rate_bin_width_hz;
        if (cmd.count("--truncation") == 0 && !common.cfg.contains("truncation"))
            trunc = p.rate_fock_truncation;
    }
    if (std::isnan(span))
        throw sqz::validation_error("half_fsr is required (flag, config, or preset)");
    if (std::isnan(bw))
        throw sqz::validation_error("bin_width is required (flag, config, or preset)");
    const sqz::SpectrumModel model = model_opts.resolve(cmd, common.cfg);

    const sqz::RateResult result = sqz::spectral_photon_rate(model, span, bw, trunc);

    std::cout << "rate_per_s: " << fmt(result.rate) << "\n";
    std::cout << "power_w: " << fmt(result.power) << "\n";
    std::cout << "conditional_mean: " << fmt(result.conditional_mean) << "\n";
    std::cout << "max_bin_trace_deficit: " << fmt(result.max_bin_trace_deficit) << "\n";
    std::cout << "bins: " << result.bins << "\n";

    if (!output_base.empty()) {
        sqz::io::CsvTable table;
        add_provenance(table.metadata, common, "spectrum rate");
        add_model_metadata(table.metadata, model);
        table.metadata.emplace_back("half_fsr_hz", fmt(span));
        table.metadata.emplace_back("bin_width_hz", fmt(bw));
        table.metadata.emplace_back("truncation", std::to_string(trunc));
        table.metadata.emplace_back("rate_per_s", fmt(result.rate));
        table.metadata.emplace_back("power_w", fmt(result.power));
        table.metadata.emplace_back("conditional_mean", fmt(result.conditional_mean));
        table.metadata.emplace_back("max_bin_trace_deficit", fmt(result.max_bin_trace_deficit));
        table.columns = {"n", "probability"};
        const auto& probs = result.weighted_distribution.probabilities;
        for (std::size_t n = 0; n < probs.size(); ++n)
            table.rows.push_back({static_cast<double>(n), probs[n]});
        sqz::io::write_csv_file(output_base + "_pn.csv", table);
        std::cout << "wrote: " << output_base << "_pn.csv\n";
    }
    return 0;
}

// --- simulate -----------------------------------------------------------------------

int run_simulate(const CLI::App& cmd, CommonOpts& common, std::uint64_t seed_flag,
                 double dark_flag, const std::string& output_base) {
    common.load();
    const json& cfg = common.cfg;
    if (cfg.empty()) throw sqz::validation_error("simulate requires --config <json>");
    auto st = cfg.find("state");
    if (st == cfg.end() || !st->is_object() || !st->contains("v1_db") || !st->contains("v2_db"))
        throw sqz::validation_error("config must contain a 'state' object with v1_db and v2_db");
    std::string conv = st->value("convention", std::string("unity"));
    const sqz::GaussianState state = sqz::GaussianState::from_db(
        st->at("v1_db").get<double>(), st->at("v2_db").get<double>(), parse_convention(conv));

    std::uint64_t seed = seed_flag;
    if (cmd.count("--seed") == 0) seed = cfg.value("seed", std::uint64_t{0});
    std::optional<double> dark;
    if (cmd.count("--dark-noise-db") > 0) {
        dark = dark_flag;
    } else if (cfg.contains("dark_noise_db")) {
        dark = cfg.at("dark_noise_db").get<double>();
    }

    if (auto sw = cfg.find("sweep"); sw != cfg.end()) {
        if (!sw->is_object() || !sw->contains("rotation_rate") || !sw->contains("total_samples") ||
            !sw->contains("window"))
            throw sqz::validation_error(
                "config 'sweep' needs rotation_rate, total_samples, and window");
        const double rate = sw->at("rotation_rate").get<double>();
        const std::size_t total = sw->at("total_samples").get<std::size_t>();
        const std::size_t window = sw->at("window").get<std::size_t>();
        const std::vector<sqz::SweepPoint> points =
            sqz::sweep_trace(state, rate, total, window, seed);

        double vmin = std::numeric_limits<double>::infinity();
        double vmax = -std::numeric_limits<double>::infinity();
        double tmin = 0.0, tmax = 0.0;
        for (const auto& p : points) {
            if (p.v_estimate < vmin) { vmin = p.v_estimate; tmin = p.theta_center; }
            if (p.v_estimate > vmax) { vmax = p.v_estimate; tmax = p.theta_center; }
        }
        std::cout << "windows: " << points.size() << "\n";
        std::cout << "min_variance: " << fmt(vmin) << "\n";
        std::cout << "min_variance_db: " << fmt(sqz::linear_to_db(vmin)) << "\n";
        std::cout << "min_theta: " << fmt(tmin) << "\n";
        std::cout << "max_variance: " << fmt(vmax) << "\n";
        std::cout << "max_variance_db: " << fmt(sqz::linear_to_db(vmax)) << "\n";
        std::cout << "max_theta: " << fmt(tmax) << "\n";

        if (!output_base.empty()) {
            sqz::io::CsvTable table;
            add_provenance(table.metadata, common, "simulate");
            table.metadata.emplace_back("v1_db", fmt(state.v1_db()));
            table.metadata.emplace_back("v2_db", fmt(state.v2_db()));
            table.metadata.emplace_back("rotation_rate", fmt(rate));
            table.metadata.emplace_back("window", std::to_string(window));
            table.metadata.emplace_back("total_samples", std::to_string(total));
            table.metadata.emplace_back("seed", std::to_string(seed));
            table.metadata.emplace_back("rng_algorithm", sqz::kRngAlgorithm);
            table.columns = {"window_index", "theta_center_radians", "variance", "variance_db"};
            for (std::size_t i = 0; i < points.size(); ++i)
                table.rows.push_back({static_cast<double>(i), points[i].theta_center,
                                      points[i].v_estimate,
                                      sqz::linear_to_db(points[i].v_estimate)});
            sqz::io::write_csv_file(output_base + "_sweep.csv", table);
            std::cout << "wrote: " << output_base << "_sweep.csv\n";
        }
        return 0;
    }

    auto seg = cfg.find("segments");
    if (seg == cfg.end() || !seg->is_array() || seg->empty())
        throw sqz::validation_error("config must contain a non-empty 'segments' array (or 'sweep')");
    std::vector<sqz::PhaseSegment> schedule;
    for (const auto& entry : *seg) {
        if (!entry.is_object() || !entry.contains("count") ||
            (!entry.contains("theta") && !entry.contains("theta_deg")))
            throw sqz::validation_error(
                "each segment needs 'theta' (radians) or 'theta_deg', plus 'count'");
        const double theta = entry.contains("theta")
                                 ? entry.at("theta").get<double>()
                                 : entry.at("theta_deg").get<double>() * M_PI / 180.0;
        schedule.push_back({theta, entry.at("count").get<std::size_t>()});
    }

    sqz::HomodyneConfig hc{state, schedule, dark, seed};
    const sqz::HomodyneTrace trace = sqz::simulate(hc);

    Meta meta;
    add_provenance(meta, common, "simulate");
    meta.emplace_back("v1_db", fmt(state.v1_db()));
    meta.emplace_back("v2_db", fmt(state.v2_db()));
    meta.emplace_back("convention", sqz::convention_name(state.convention()));
    if (dark) meta.emplace_back("dark_noise_db", fmt(*dark));
    meta.emplace_back("seed", std::to_string(trace.seed_used));
    meta.emplace_back("rng_algorithm", trace.rng_algorithm);

    std::cout << "segments: " << trace.segments.size() << "\n";
    std::cout << "seed: " << trace.seed_used << "\n";
    std::cout << "rng_algorithm: " << trace.rng_algorithm << "\n";

    sqz::io::CsvTable est;
    est.metadata = meta;
    est.columns = {"segment_index", "theta_radians", "sample_count", "v_normalized", "v_db",
                   "standard_error"};
    for (std::size_t i = 0; i < trace.segments.size(); ++i) {
        const sqz::VarianceEstimate ve =
            sqz::estimate_variance(trace.segments[i], trace.vacuum_reference, dark);
        est.rows.push_back({static_cast<double>(i), trace.schedule[i].theta,
                            static_cast<double>(trace.segments[i].size()), ve.v_normalized,
                            sqz::linear_to_db(ve.v_normalized), ve.standard_error});
        std::cout << "segment " << i << ": theta " << fmt(trace.schedule[i].theta) << "; v "
                  << fmt(ve.v_normalized) << " (" << fmt(sqz::linear_to_db(ve.v_normalized))
                  << " dB); se " << fmt(ve.standard_error) << "\n";
    }

    if (output_base.empty()) return 0;

    sqz::io::CsvTable tt;
    tt.metadata = meta;
    tt.columns = {"segment_index", "theta_radians", "sample_value"};
    for (double v : trace.vacuum_reference) tt.rows.push_back({-1.0, 0.0, v});
    for (std::size_t i = 0; i < trace.segments.size(); ++i)
        for (double v : trace.segments[i])
            tt.rows.push_back({static_cast<double>(i), trace.schedule[i].theta, v});
    sqz::io::write_csv_file(output_base + "_trace.csv", tt);
    sqz::io::write_csv_file(output_base + "_estimates.csv", est);
    std::cout << "wrote: " << output_base << "_trace.csv\n";
    std::cout << "wrote: " << output_base << "_estimates.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sqz: squeezed-vacuum state analysis (loss inference, Fock matrices, Wigner maps,"
                 " noise spectra, homodyne simulation)"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("sqz ") + kToolVersion);
    int rc = 0;

    // analyze
    auto* c_an = app.add_subcommand("analyze", "infer optical loss from squeezing/anti-squeezing pairs");
    CommonOpts an_common;
    an_common.attach(c_an);
    std::string an_pairs, an_input, an_preset, an_output;
    c_an->add_option("--pairs", an_pairs,
                     "pairs as '<squeezing_db>:<antisqueezing_db>,...' e.g. '-2.9:2.9,-6.2:6.7'");
    c_an->add_option("--input", an_input, "CSV with squeezing_db/antisqueezing_db columns");
    c_an->add_option("--preset", an_preset, "named parameter bundle ('published')");
    c_an->add_option("--output", an_output, "write a JSON report here");
    c_an->callback([&]() { rc = run_analyze(*c_an, an_common, an_pairs, an_input, an_preset, an_output); });

    // fock
    auto* c_fk = app.add_subcommand("fock", "photon-number density matrix and P(n)");
    CommonOpts fk_common;
    fk_common.attach(c_fk);
    StateOpts fk_state;
    fk_state.attach(c_fk, "unity");
    std::size_t fk_trunc = 170;
    bool fk_norm = false, fk_verify = false;
    std::size_t fk_workspace = 0;
    std::string fk_output, fk_format = "csv";
    c_fk->add_option("--truncation", fk_trunc, "largest photon number kept (default 170)");
    c_fk->add_flag("--normalized", fk_norm, "renormalize the truncated matrix to unit trace");
    c_fk->add_flag("--verify-oracle", fk_verify,
                   "cross-check entries against the squeezed-thermal operator construction");
    c_fk->add_option("--oracle-workspace", fk_workspace,
                     "oracle workspace dimension (0 = automatic)");
    c_fk->add_option("--output", fk_output, "output base path (writes <base>_matrix.csv, <base>_pn.csv)");
    c_fk->add_option("--format", fk_format, "csv or json (json writes a single <base>.json bundle)");
    c_fk->callback([&]() {
        rc = run_fock(*c_fk, fk_common, fk_state, fk_trunc, fk_norm, fk_verify, fk_workspace,
                      fk_output, fk_format);
    });

    // wigner
    auto* c_wg = app.add_subcommand("wigner", "phase-space quasi-probability grid and marginals");
    CommonOpts wg_common;
    wg_common.attach(c_wg);
    StateOpts wg_state;
    wg_state.attach(c_wg, "quarter");
    double wg_extent = 6.0;
    std::size_t wg_points = 512;
    std::string wg_output;
    c_wg->add_option("--extent-sigmas", wg_extent, "half-width of each axis in its own sigma");
    c_wg->add_option("--points", wg_points, "grid points per axis");
    c_wg->add_option("--output", wg_output,
                     "output base path (writes <base>_grid.csv and two marginal CSVs)");
    c_wg->callback([&]() { rc = run_wigner(*c_wg, wg_common, wg_state, wg_extent, wg_points, wg_output); });

    // spectrum
    auto* c_sp = app.add_subcommand("spectrum", "noise-spectrum model: eval, fit, bandwidth, rate");
    c_sp->require_subcommand(1);

    auto* c_ev = c_sp->add_subcommand("eval", "evaluate model variances over frequency");
    CommonOpts ev_common;
    ev_common.attach(c_ev);
    ModelOpts ev_model;
    ev_model.attach(c_ev);
    double ev_fmin = 0.0, ev_fmax = 5e8;
    std::size_t ev_points = 501;
    std::vector<double> ev_at;
    std::string ev_output;
    c_ev->add_option("--fmin", ev_fmin, "first frequency, Hz");
    c_ev->add_option("--fmax", ev_fmax, "last frequency, Hz");
    c_ev->add_option("--points", ev_points, "number of frequencies");
    c_ev->add_option("--at", ev_at, "print v1_db/v2_db at these frequencies (Hz); repeatable");
    c_ev->add_option("--output", ev_output, "CSV output path (f_hz, v1_db, v2_db)");
    c_ev->callback([&]() {
        rc = run_spectrum_eval(*c_ev, ev_common, ev_model, ev_fmin, ev_fmax, ev_points, ev_at,
                               ev_output);
    });

    auto* c_ft = c_sp->add_subcommand("fit", "least-squares fit of the model to measured curves");
    CommonOpts ft_common;
    ft_common.attach(c_ft);
    ModelOpts ft_model;
    ft_model.attach(c_ft);
    std::string ft_input, ft_target = "joint", ft_output;
    double ft_rbw = nan_default();
    c_ft->add_option("--input", ft_input, "CSV with f_hz and v1_db and/or v2_db columns");
    c_ft->add_option("--target", ft_target, "which traces to fit: v1, v2, or joint (default)");
    c_ft->add_option("--rbw", ft_rbw, "resolution bandwidth of the measurement, Hz");
    c_ft->add_option("--output", ft_output, "write a JSON fit report here");
    c_ft->callback([&]() {
        rc = run_spectrum_fit(*c_ft, ft_common, ft_model, ft_input, ft_target, ft_rbw, ft_output);
    });

    auto* c_bw = c_sp->add_subcommand("bandwidth", "squeezing half-width frequency");
    CommonOpts bw_common;
    bw_common.attach(c_bw);
    ModelOpts bw_model;
    bw_model.attach(c_bw);
    std::string bw_output;
    c_bw->add_option("--output", bw_output, "write a JSON report here");
    c_bw->callback([&]() { rc = run_spectrum_bandwidth(*c_bw, bw_common, bw_model, bw_output); });

    auto* c_rt = c_sp->add_subcommand("rate", "down-converted photon rate over half a free spectral range");
    CommonOpts rt_common;
    rt_common.attach(c_rt);
    ModelOpts rt_model;
    rt_model.attach(c_rt);
    double rt_span = nan_default(), rt_bin = nan_default();
    std::size_t rt_trunc = 170;
    std::string rt_output;
    c_rt->add_option("--half-fsr", rt_span, "integration span, Hz");
    c_rt->add_option("--bin-width", rt_bin, "frequency bin width, Hz");
    c_rt->add_option("--truncation", rt_trunc, "per-bin photon-number cutoff (default 170)");
    c_rt->add_option("--output", rt_output, "output base path (writes <base>_pn.csv)");
    c_rt->callback([&]() {
        rc = run_spectrum_rate(*c_rt, rt_common, rt_model, rt_span, rt_bin, rt_trunc, rt_output);
    });

    // simulate
    auto* c_sm = app.add_subcommand("simulate", "seeded homodyne sampling of a state");
    CommonOpts sm_common;
    sm_common.attach(c_sm);
    std::uint64_t sm_seed = 0;
    double sm_dark = nan_default();
    std::string sm_output;
    c_sm->add_option("--seed", sm_seed, "overrides the config seed");
    c_sm->add_option("--dark-noise-db", sm_dark, "overrides the config dark noise level");
    c_sm->add_option("--output", sm_output,
                     "output base path (writes <base>_trace.csv and <base>_estimates.csv, "
                     "or <base>_sweep.csv in sweep mode)");
    c_sm->callback([&]() { rc = run_simulate(*c_sm, sm_common, sm_seed, sm_dark, sm_output); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const sqz::validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const sqz::convergence_error& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return 3;
    } catch (const json::exception& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
