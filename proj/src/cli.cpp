#include "ifdetect/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ifdetect/io.hpp"
#include "ifdetect/log.hpp"

namespace ifd::log {

Level level() {
    static const Level lvl = [] {
        const char* env = std::getenv("IFDETECT_LOG");
        if (!env) return Level::Info;
        const std::string s(env);
        if (s == "quiet" || s == "0") return Level::Quiet;
        if (s == "debug" || s == "2") return Level::Debug;
        return Level::Info;
    }();
    return lvl;
}

void info(const std::string& msg) {
    if (level() >= Level::Info) std::cerr << "[ifdetect] " << msg << "\n";
}

void debug(const std::string& msg) {
    if (level() >= Level::Debug) std::cerr << "[ifdetect:debug] " << msg << "\n";
}

}  // namespace ifd::log

namespace ifd::cli {

namespace {

Vec parse_vector(const std::string& s) {
    std::vector<double> vals;
    std::string field;
    std::istringstream ss(s);
    while (std::getline(ss, field, ','))
        vals.push_back(std::stod(field));
    if (vals.empty()) throw ParseError("empty vector argument '" + s + "'");
    return Eigen::Map<Vec>(vals.data(), long(vals.size()));
}

Mat parse_matrix(const std::string& s) {
    std::vector<Vec> rows;
    std::string row;
    std::istringstream ss(s);
    while (std::getline(ss, row, ';')) rows.push_back(parse_vector(row));
    Mat m(long(rows.size()), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols())
            throw ParseError("matrix argument rows have unequal lengths");
        m.row(long(i)) = rows[i].transpose();
    }
    return m;
}

// "mu:nu:f,mu:nu:f,..." along a common direction.
FaultSchedule parse_episodes(const std::string& s, const Vec& direction) {
    FaultSchedule schedule;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        std::istringstream fs(item);
        std::string mu, nu, f;
        if (!std::getline(fs, mu, ':') || !std::getline(fs, nu, ':') || !std::getline(fs, f))
            throw ParseError("episode '" + item + "' must be mu:nu:f");
        FaultEpisode e;
        e.mu = std::stol(mu);
        e.nu = std::stol(nu);
        e.magnitude = std::stod(f);
        e.direction = direction;
        schedule.episodes.push_back(std::move(e));
    }
    return schedule;
}

struct FaultFlags {
    std::string xi;
    double f = 0.0;
    long tau_on = 0, tau_off_prev = 0, tau_off_next = 0;
    bool lower_bounds = false;

    IFParams params(long dim) const {
        IFParams p;
        p.direction = parse_vector(xi);
        if (p.direction.size() != dim)
            throw DimensionMismatch("--xi has dimension " + std::to_string(p.direction.size()) +
                                    ", model expects " + std::to_string(dim));
        p.magnitude = f;
        p.tau_on = tau_on;
        p.tau_off_prev = tau_off_prev;
        p.tau_off_next = tau_off_next;
        p.is_lower_bound = lower_bounds;
        return p;
    }
};

void add_fault_options(CLI::App* cmd, FaultFlags& ff, bool required) {
    auto* xi = cmd->add_option("--xi", ff.xi, "fault direction, comma-separated");
    auto* f = cmd->add_option("--f", ff.f, "fault magnitude (or its lower bound)");
    auto* on = cmd->add_option("--tau-on", ff.tau_on, "active duration in samples");
    auto* op = cmd->add_option("--tau-off-prev", ff.tau_off_prev,
                               "inactive duration before the episode");
    auto* onx = cmd->add_option("--tau-off-next", ff.tau_off_next,
                                "inactive duration after the episode");
    cmd->add_flag("--lower-bounds", ff.lower_bounds,
                  "treat magnitude/durations as lower bounds");
    if (required) {
        xi->required();
        f->required();
        on->required();
        op->required();
        onx->required();
    }
}

int cmd_train(const std::string& input, const std::string& output) {
    const Mat samples = read_stream_csv(input);
    log::info("training on " + std::to_string(samples.rows()) + " samples of dimension " +
              std::to_string(samples.cols()));
    const GaussianModel model = fit_model(samples);
    save_model(output, model);
    log::info("model written to " + output);
    return kExitOk;
}

int cmd_detectability(const std::string& model_path, const FaultFlags& ff, double alpha,
                      const std::string& json_out) {
    const GaussianModel model = load_model(model_path);
    const IFParams params = ff.params(model.dim);
    const DetectabilityReport rep = analyze(model, params, alpha);

    std::cout << "whitened shift: " << whitened_shift(model, params) << "\n";
    std::cout << "verdict: " << (rep.detectable ? "guaranteed detectable" : "not detectable")
              << (params.is_lower_bound ? " (from lower bounds)" : "") << "\n";
    if (rep.admissible.empty()) {
        std::cout << "admissible windows: none\n";
    } else {
        std::cout << "admissible windows: [" << rep.admissible.lo << ", " << rep.admissible.hi
                  << "]" << (rep.hi_is_boundary ? " (upper edge at the duration boundary)" : "")
                  << "\n";
        std::cout << "W   mu_delay  nu_delay  offset\n";
        for (const auto& d : rep.delays)
            std::cout << d.window << "   " << d.mu_delay << "         " << d.nu_delay
                      << "         " << d.k_doublestar_offset << "\n";
    }
    if (rep.w_star)
        std::cout << "W* = " << *rep.w_star << "\n";
    else
        std::cout << "W* undefined (magnitude below the permanent-fault threshold)\n";
    std::cout << "W# = " << rep.w_sharp << "\n";

    if (!json_out.empty()) {
        nlohmann::json j;
        j["detectable"] = rep.detectable;
        j["admissible"] = {{"lo", rep.admissible.lo}, {"hi", rep.admissible.hi}};
        j["hi_is_boundary"] = rep.hi_is_boundary;
        j["w_star"] = rep.w_star ? nlohmann::json(*rep.w_star) : nlohmann::json(nullptr);
        j["w_sharp"] = rep.w_sharp;
        nlohmann::json delays = nlohmann::json::array();
        for (const auto& d : rep.delays)
            delays.push_back({{"W", d.window},
                              {"mu_delay", d.mu_delay},
                              {"nu_delay", d.nu_delay},
                              {"k_doublestar_offset", d.k_doublestar_offset}});
        j["delays"] = std::move(delays);
        std::ofstream out(json_out);
        if (!out) throw ParseError("cannot open " + json_out + " for writing");
        out << j.dump(2) << "\n";
    }
    return rep.detectable ? kExitOk : kExitVerdict;
}

int cmd_monitor(const std::string& model_path, const std::string& input, const FaultFlags& ff,
                double alpha, std::vector<long> windows, const std::string& order,
                const std::string& report_path, const std::string& stats_path) {
    const GaussianModel model = load_model(model_path);
    const Mat stream = read_stream_csv(input);
    if (stream.cols() != model.dim)
        throw DimensionMismatch("stream has dimension " + std::to_string(stream.cols()) +
                                ", model expects " + std::to_string(model.dim));

    BankConfig cfg;
    cfg.alpha = alpha;
    cfg.params = ff.params(model.dim);
    cfg.order = order == "exclude-first" ? CleaningOrder::ExcludeThenCompensate
                                         : CleaningOrder::CompensateThenExclude;
    if (windows.empty()) {
        const DetectabilityReport rep = analyze(model, cfg.params, alpha);
        if (rep.admissible.empty()) {
            std::cerr << "error: fault is not guaranteed detectable with any window; "
                         "pass --windows to override\n";
            return kExitVerdict;
        }
        for (long w = rep.admissible.lo; w <= rep.admissible.hi; ++w) windows.push_back(w);
    }
    cfg.windows = std::move(windows);

    const BankReport report = ifd::run(model, cfg, stream);
    log::debug("cleaning passes: " + std::to_string(report.cleaning_passes));
    save_report(report_path, report);
    log::info("report written to " + report_path);
    if (!stats_path.empty()) {
        write_statistics_csv(stats_path, model, cfg, stream);
        log::info("statistic series written to " + stats_path);
    }
    std::cout << "episodes: " << report.episodes.size() << "\n";
    for (const auto& e : report.episodes) {
        std::cout << "q=" << e.q << (e.confirmed ? "" : " (unconfirmed)") << " mu in ["
                  << (e.mu_lo ? std::to_string(*e.mu_lo) : "?") << ", "
                  << (e.mu_hi ? std::to_string(*e.mu_hi) : "?") << "] nu in ["
                  << (e.nu_lo ? std::to_string(*e.nu_lo) : "?") << ", "
                  << (e.nu_hi ? std::to_string(*e.nu_hi) : "?") << "]";
        for (const auto& fl : e.flags) std::cout << " [" << fl << "]";
        std::cout << "\n";
    }
    return kExitOk;
}

BankReport bank_run_logged(const GaussianModel& model, const BankConfig& cfg, const Mat& stream);

int cmd_report(const std::string& input, const std::string& truth_path) {
    std::ifstream in(input);
    if (!in) throw ParseError("cannot open " + input + " for reading");
    nlohmann::json j;
    try {
        in >> j;
        if (j.at("format") != "ifdetect-report")
            throw ParseError(input + ": not an ifdetect report");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(input + ": invalid report JSON: " + e.what());
    }

    std::cout << "windows:";
    for (const auto& w : j.at("windows")) std::cout << " " << w.get<long>();
    std::cout << "  alpha: " << j.at("alpha").get<double>() << "\n";

    struct Row {
        long q;
        bool confirmed;
        std::optional<long> mu_lo, mu_hi, nu_lo, nu_hi;
    };
    std::vector<Row> rows;
    for (const auto& e : j.at("episodes")) {
        Row r;
        r.q = e.at("q").get<long>();
        r.confirmed = e.at("confirmed").get<bool>();
        auto opt = [&](const char* key) -> std::optional<long> {
            if (e.at(key).is_null()) return std::nullopt;
            return e.at(key).get<long>();
        };
        r.mu_lo = opt("mu_lo");
        r.mu_hi = opt("mu_hi");
        r.nu_lo = opt("nu_lo");
        r.nu_hi = opt("nu_hi");
        rows.push_back(r);
        std::cout << "q=" << r.q << (r.confirmed ? "" : " (unconfirmed)") << " mu in ["
                  << (r.mu_lo ? std::to_string(*r.mu_lo) : "?") << ", "
                  << (r.mu_hi ? std::to_string(*r.mu_hi) : "?") << "] nu in ["
                  << (r.nu_lo ? std::to_string(*r.nu_lo) : "?") << ", "
                  << (r.nu_hi ? std::to_string(*r.nu_hi) : "?") << "]";
        for (const auto& fl : e.at("flags")) std::cout << " [" << fl.get<std::string>() << "]";
        std::cout << "\n";
    }

    if (truth_path.empty()) return kExitOk;

    const FaultSchedule truth = read_truth_csv(truth_path, Vec::Zero(1));
    bool all_contained = true;
    const std::size_t n = std::min(rows.size(), truth.episodes.size());
    if (rows.size() != truth.episodes.size()) {
        std::cout << "episode count mismatch: report " << rows.size() << ", truth "
                  << truth.episodes.size() << "\n";
        all_contained = false;
    }
    for (std::size_t q = 0; q < n; ++q) {
        const auto& r = rows[q];
        const auto& t = truth.episodes[q];
        const bool mu_ok = (!r.mu_lo || *r.mu_lo <= t.mu) && (!r.mu_hi || t.mu <= *r.mu_hi);
        const bool nu_ok = (!r.nu_lo || *r.nu_lo <= t.nu) && (!r.nu_hi || t.nu <= *r.nu_hi);
        std::cout << "q=" << r.q << " truth mu=" << t.mu << " nu=" << t.nu << " -> "
                  << (mu_ok && nu_ok ? "contained" : "NOT contained") << "\n";
        all_contained = all_contained && mu_ok && nu_ok;
    }
    return all_contained ? kExitOk : kExitVerdict;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Streaming intermittent-fault detection with moving-average T^2 chart banks"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an INI/TOML file (flags win)");

    // train
    std::string train_in, train_out;
    auto* train = app.add_subcommand("train", "fit a Gaussian model from a stream CSV");
    train->add_option("--input", train_in, "training stream CSV")->required();
    train->add_option("--output", train_out, "model JSON path")->required();

    // detectability
    std::string det_model, det_json;
    double det_alpha = 0.01;
    FaultFlags det_ff;
    auto* det = app.add_subcommand("detectability", "evaluate guaranteed detectability");
    det->add_option("--model", det_model, "model JSON")->required();
    det->add_option("--alpha", det_alpha, "significance level");
    det->add_option("--json", det_json, "also write the report as JSON");
    add_fault_options(det, det_ff, true);

    // simulate gaussian / cstr
    auto* sim = app.add_subcommand("simulate", "generate fixture streams");
    sim->require_subcommand(1);

    std::string g_mean = "6,4", g_cov = "3,2.6;2.6,4", g_out, g_truth, g_episodes, g_xi;
    long g_n = 5000, g_rand_count = 0, g_tau_lower = 10, g_start = 201;
    double g_f_lower = 4.0;
    std::uint64_t g_seed = 1;
    auto* simg = sim->add_subcommand("gaussian", "multivariate Gaussian stream");
    simg->add_option("--mean", g_mean, "mean vector, comma-separated");
    simg->add_option("--cov", g_cov, "covariance rows separated by ';'");
    simg->add_option("--n", g_n, "number of samples");
    simg->add_option("--seed", g_seed, "RNG seed");
    simg->add_option("--output", g_out, "stream CSV path")->required();
    simg->add_option("--fault-xi", g_xi, "fault direction");
    simg->add_option("--fault-episodes", g_episodes, "explicit schedule mu:nu:f,...");
    simg->add_option("--random-faults", g_rand_count, "draw this many episodes at random");
    simg->add_option("--f-lower", g_f_lower, "magnitude lower bound for random faults");
    simg->add_option("--tau-lower", g_tau_lower, "duration lower bound for random faults");
    simg->add_option("--start", g_start, "first random episode start");
    simg->add_option("--truth-output", g_truth, "ground-truth sidecar CSV path");

    std::string c_out, c_truth, c_episodes;
    long c_n = 5000, c_rand_count = 0, c_tau_lower = 10, c_start = 101, c_fault_var = 4;
    double c_f_lower = 4.0;
    std::uint64_t c_seed = 1;
    CstrConfig cstr;
    auto* simc = sim->add_subcommand("cstr", "closed-loop reactor stream [C_A, T, T_c, q]");
    simc->add_option("--n", c_n, "number of samples");
    simc->add_option("--seed", c_seed, "RNG seed");
    simc->add_option("--output", c_out, "stream CSV path")->required();
    simc->add_option("--fault-var", c_fault_var, "measured variable carrying the sensor fault");
    simc->add_option("--fault-episodes", c_episodes, "explicit schedule mu:nu:f,...");
    simc->add_option("--random-faults", c_rand_count, "draw this many episodes at random");
    simc->add_option("--f-lower", c_f_lower, "magnitude lower bound for random faults");
    simc->add_option("--tau-lower", c_tau_lower, "duration lower bound for random faults");
    simc->add_option("--start", c_start, "first random episode start");
    simc->add_option("--truth-output", c_truth, "ground-truth sidecar CSV path");
    simc->add_option("--cstr-flow", cstr.flow_nominal, "nominal feed flow [L/min]");
    simc->add_option("--cstr-volume", cstr.volume, "reactor volume [L]");
    simc->add_option("--cstr-feed-conc", cstr.feed_conc, "feed concentration [mol/L]");
    simc->add_option("--cstr-feed-temp", cstr.feed_temp, "feed temperature [K]");
    simc->add_option("--cstr-rate-const", cstr.rate_const, "pre-exponential rate [1/min]");
    simc->add_option("--cstr-activation-temp", cstr.activation_temp, "E/R [K]");
    simc->add_option("--cstr-heat-reaction", cstr.heat_reaction, "reaction enthalpy [J/mol]");
    simc->add_option("--cstr-density", cstr.density, "density [g/L]");
    simc->add_option("--cstr-heat-capacity", cstr.heat_capacity, "heat capacity [J/(g K)]");
    simc->add_option("--cstr-heat-transfer", cstr.heat_transfer, "UA [J/(min K)]");
    simc->add_option("--cstr-coolant-temp", cstr.coolant_temp_nominal, "nominal coolant [K]");
    simc->add_option("--cstr-temp-setpoint", cstr.temp_setpoint, "temperature setpoint [K]");
    simc->add_option("--cstr-conc-setpoint", cstr.conc_setpoint, "concentration setpoint");
    simc->add_option("--cstr-kc-temp", cstr.kc_temp, "temperature loop gain");
    simc->add_option("--cstr-ki-temp", cstr.ki_temp, "temperature loop reset [1/min]");
    simc->add_option("--cstr-kc-conc", cstr.kc_conc, "concentration loop gain");
    simc->add_option("--cstr-ki-conc", cstr.ki_conc, "concentration loop reset [1/min]");
    simc->add_option("--cstr-noise-conc", cstr.noise_conc_std, "v1 std [mol/(L min)]");
    simc->add_option("--cstr-noise-temp", cstr.noise_temp_std, "v2 std [K/min]");
    simc->add_option("--cstr-sampling-interval", cstr.sampling_interval_s, "seconds per sample");
    simc->add_option("--cstr-substeps", cstr.substeps, "RK4 steps per sampling interval");

    // monitor
    std::string m_model, m_input, m_report, m_stats, m_order = "compensate-first";
    double m_alpha = 0.01;
    std::vector<long> m_windows;
    FaultFlags m_ff;
    auto* mon = app.add_subcommand("monitor", "run the chart bank over a stream CSV");
    mon->add_option("--model", m_model, "model JSON")->required();
    mon->add_option("--input", m_input, "stream CSV")->required();
    mon->add_option("--alpha", m_alpha, "significance level");
    mon->add_option("--windows", m_windows, "explicit window lengths (default: admissible range)")
        ->delimiter(',');
    mon->add_option("--order", m_order, "cleaning order: compensate-first | exclude-first")
        ->check(CLI::IsMember({"compensate-first", "exclude-first"}));
    mon->add_option("--report", m_report, "bank report JSON path")->required();
    mon->add_option("--stats", m_stats, "per-window statistic CSV path");
    add_fault_options(mon, m_ff, true);

    // report
    std::string r_input, r_truth;
    auto* rpt = app.add_subcommand("report", "render a bank report, optionally scored");
    rpt->add_option("--input", r_input, "bank report JSON")->required();
    rpt->add_option("--truth", r_truth, "ground-truth sidecar CSV for containment scoring");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitParse;
    }

    try {
        if (*train) return cmd_train(train_in, train_out);
        if (*det) return cmd_detectability(det_model, det_ff, det_alpha, det_json);
        if (*simg) {
            Mat stream = gen_gaussian_stream(parse_vector(g_mean), parse_matrix(g_cov), g_n,
                                             g_seed);
            FaultSchedule schedule;
            if (g_rand_count > 0) {
                if (g_xi.empty()) throw ParseError("--random-faults requires --fault-xi");
                schedule = random_schedule(parse_vector(g_xi), g_rand_count, g_f_lower,
                                           g_tau_lower, g_start, g_seed + 0x9e3779b97f4a7c15ull);
            } else if (!g_episodes.empty()) {
                if (g_xi.empty()) throw ParseError("--fault-episodes requires --fault-xi");
                schedule = parse_episodes(g_episodes, parse_vector(g_xi));
            }
            if (!schedule.episodes.empty()) stream = inject_faults(stream, schedule);
            write_stream_csv(g_out, stream);
            if (!g_truth.empty()) write_truth_csv(g_truth, schedule);
            log::info("wrote " + std::to_string(stream.rows()) + " samples to " + g_out);
            return kExitOk;
        }
        if (*simc) {
            if (c_fault_var < 1 || c_fault_var > 4)
                throw ParseError("--fault-var must be in 1..4");
            Vec dir = Vec::Zero(4);
            dir[c_fault_var - 1] = 1.0;
            FaultSchedule schedule;
            if (c_rand_count > 0)
                schedule = random_schedule(dir, c_rand_count, c_f_lower, c_tau_lower, c_start,
                                           c_seed + 0x9e3779b97f4a7c15ull);
            else if (!c_episodes.empty())
                schedule = parse_episodes(c_episodes, dir);
            const Mat stream = cstr_simulate(cstr, c_n, c_seed, schedule);
            write_stream_csv(c_out, stream);
            if (!c_truth.empty()) write_truth_csv(c_truth, schedule);
            log::info("wrote " + std::to_string(stream.rows()) + " samples to " + c_out);
            return kExitOk;
        }
        if (*mon)
            return cmd_monitor(m_model, m_input, m_ff, m_alpha, m_windows, m_order, m_report,
                               m_stats);
        if (*rpt) return cmd_report(r_input, r_truth);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const NotDetectableWithW& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitVerdict;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitRuntime;
}

}  // namespace ifd::cli
