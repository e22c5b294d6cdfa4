#include "ifdetect/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ifd {

namespace {

using nlohmann::json;

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_double(const std::string& s, const std::string& file, long row, std::size_t col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(file + ": row " + std::to_string(row) + ", column " +
                         std::to_string(col + 1) + ": cannot parse '" + s + "' as a number");
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    out.precision(17);
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string() + " for reading");
    return in;
}

json interval_pair_to_json(const IntervalPair& p) {
    json j;
    j["mu_lo"] = p.mu_lo ? json(*p.mu_lo) : json(nullptr);
    j["mu_hi"] = p.mu_hi ? json(*p.mu_hi) : json(nullptr);
    j["nu_lo"] = p.nu_lo ? json(*p.nu_lo) : json(nullptr);
    j["nu_hi"] = p.nu_hi ? json(*p.nu_hi) : json(nullptr);
    return j;
}

json alarms_to_json(const std::vector<AlarmInterval>& intervals) {
    json arr = json::array();
    for (const auto& iv : intervals)
        arr.push_back({{"start", iv.start}, {"end", iv.closed() ? json(*iv.end) : json(nullptr)}});
    return arr;
}

}  // namespace

void write_stream_csv(const std::filesystem::path& path, const Eigen::Ref<const Mat>& stream) {
    auto out = open_out(path);
    out << "k";
    for (long j = 0; j < stream.cols(); ++j) out << ",var_" << (j + 1);
    out << "\n";
    for (long i = 0; i < stream.rows(); ++i) {
        out << (i + 1);
        for (long j = 0; j < stream.cols(); ++j) out << "," << stream(i, j);
        out << "\n";
    }
}

Mat read_stream_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path.string() + ": empty file");
    const auto header = split_line(line);
    if (header.size() < 2 || header[0] != "k")
        throw ParseError(path.string() + ": header must be 'k,var_1..var_p', got '" + line + "'");
    for (std::size_t j = 1; j < header.size(); ++j)
        if (header[j] != "var_" + std::to_string(j))
            throw ParseError(path.string() + ": missing or misnamed column 'var_" +
                             std::to_string(j) + "' (got '" + header[j] + "')");
    const std::size_t p = header.size() - 1;

    std::vector<double> values;
    long rows = 0;
    long row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != p + 1)
            throw ParseError(path.string() + ": row " + std::to_string(row_no) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(p + 1));
        for (std::size_t j = 1; j <= p; ++j)
            values.push_back(parse_double(fields[j], path.string(), row_no, j));
        ++rows;
    }
    Mat out(rows, long(p));
    for (long i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < p; ++j) out(i, long(j)) = values[std::size_t(i) * p + j];
    return out;
}

void write_truth_csv(const std::filesystem::path& path, const FaultSchedule& schedule) {
    auto out = open_out(path);
    out << "q,mu,nu,f\n";
    for (std::size_t q = 0; q < schedule.episodes.size(); ++q) {
        const auto& e = schedule.episodes[q];
        out << (q + 1) << "," << e.mu << "," << e.nu << "," << e.magnitude << "\n";
    }
}

FaultSchedule read_truth_csv(const std::filesystem::path& path, const Vec& direction) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || split_line(line) != std::vector<std::string>{"q", "mu", "nu", "f"})
        throw ParseError(path.string() + ": header must be 'q,mu,nu,f'");
    FaultSchedule schedule;
    long row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != 4)
            throw ParseError(path.string() + ": row " + std::to_string(row_no) +
                             " has " + std::to_string(fields.size()) + " fields, expected 4");
        FaultEpisode e;
        e.mu = long(parse_double(fields[1], path.string(), row_no, 1));
        e.nu = long(parse_double(fields[2], path.string(), row_no, 2));
        e.magnitude = parse_double(fields[3], path.string(), row_no, 3);
        e.direction = direction;
        schedule.episodes.push_back(std::move(e));
    }
    return schedule;
}

void save_model(const std::filesystem::path& path, const GaussianModel& model) {
    json j;
    j["format"] = "ifdetect-model";
    j["version"] = 1;
    j["dim"] = model.dim;
    j["n_train"] = model.n_train;
    j["mean"] = std::vector<double>(model.mean_hat.data(), model.mean_hat.data() + model.dim);
    json cov = json::array();
    for (long i = 0; i < model.dim; ++i) {
        json row = json::array();
        for (long k = 0; k < model.dim; ++k) row.push_back(model.cov_hat(i, k));
        cov.push_back(std::move(row));
    }
    j["cov"] = std::move(cov);
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

GaussianModel load_model(const std::filesystem::path& path) {
    auto in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": invalid JSON: " + e.what());
    }
    try {
        if (j.at("format") != "ifdetect-model" || j.at("version") != 1)
            throw ParseError(path.string() + ": not an ifdetect model (version 1)");
        const long p = j.at("dim").get<long>();
        Vec mean(p);
        for (long i = 0; i < p; ++i) mean[i] = j.at("mean").at(std::size_t(i)).get<double>();
        Mat cov(p, p);
        for (long i = 0; i < p; ++i)
            for (long k = 0; k < p; ++k)
                cov(i, k) = j.at("cov").at(std::size_t(i)).at(std::size_t(k)).get<double>();
        return model_from_moments(mean, cov, j.at("n_train").get<long>());
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": malformed model document: " + e.what());
    }
}

std::string report_to_json(const BankReport& report) {
    json j;
    j["format"] = "ifdetect-report";
    j["version"] = 1;
    j["windows"] = report.windows;
    j["alpha"] = report.alpha;
    j["cleaning_passes"] = report.cleaning_passes;
    j["flags"] = report.flags;

    json delays = json::object();
    for (const auto& [w, d] : report.delays)
        delays[std::to_string(w)] = {{"mu_delay", d.mu_delay},
                                     {"nu_delay", d.nu_delay},
                                     {"k_doublestar_offset", d.k_doublestar_offset}};
    j["delays"] = std::move(delays);

    json cleaned = json::object();
    for (const auto& [w, seq] : report.cleaned_alarms)
        cleaned[std::to_string(w)] = alarms_to_json(seq.intervals);
    j["cleaned_alarms"] = std::move(cleaned);

    json episodes = json::array();
    for (const auto& epi : report.episodes) {
        json e;
        e["q"] = epi.q;
        e["confirmed"] = epi.confirmed;
        e["mu_lo"] = epi.mu_lo ? json(*epi.mu_lo) : json(nullptr);
        e["mu_hi"] = epi.mu_hi ? json(*epi.mu_hi) : json(nullptr);
        e["nu_lo"] = epi.nu_lo ? json(*epi.nu_lo) : json(nullptr);
        e["nu_hi"] = epi.nu_hi ? json(*epi.nu_hi) : json(nullptr);
        e["flags"] = epi.flags;
        json pw = json::object();
        for (const auto& [w, audit] : epi.per_window)
            pw[std::to_string(w)] = {{"alarms", alarms_to_json(audit.alarms)},
                                     {"interval", interval_pair_to_json(audit.inference)}};
        e["per_window"] = std::move(pw);
        episodes.push_back(std::move(e));
    }
    j["episodes"] = std::move(episodes);
    return j.dump(2);
}

void save_report(const std::filesystem::path& path, const BankReport& report) {
    auto out = open_out(path);
    out << report_to_json(report) << "\n";
}

void write_statistics_csv(const std::filesystem::path& path, const GaussianModel& model,
                          const BankConfig& cfg, const Eigen::Ref<const Mat>& stream) {
    auto out = open_out(path);
    out << "k,W,t2,limit,alarm\n";
    for (long w : cfg.windows) {
        MovingChart chart(model, ChartConfig{cfg.alpha, w});
        for (long k = 0; k < stream.rows(); ++k) {
            const auto res = chart.step(stream.row(k).transpose());
            if (res)
                out << (k + 1) << "," << w << "," << res->t2 << "," << chart.limit() << ","
                    << (res->alarm ? 1 : 0) << "\n";
        }
    }
}

}  // namespace ifd
