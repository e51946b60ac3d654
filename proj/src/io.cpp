#include "gsm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace gsm {

DataError::DataError(const std::string& what, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "NA";
    }
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, result.ptr);
}

//==========================================================================
// CSV
//==========================================================================

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), columns_(header.size()) {
    for (const auto& h : header) {
        field(h);
    }
    end_row();
}

void CsvWriter::separator() {
    if (in_row_ > 0) {
        out_ << ',';
    }
    ++in_row_;
}

CsvWriter& CsvWriter::field(std::string_view text) {
    separator();
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) {
        out_ << text;
        return *this;
    }
    out_ << '"';
    for (char c : text) {
        if (c == '"') {
            out_ << '"';
        }
        out_ << c;
    }
    out_ << '"';
    return *this;
}

CsvWriter& CsvWriter::field(double v) {
    separator();
    out_ << format_double(v);
    return *this;
}

CsvWriter& CsvWriter::field(std::size_t v) {
    separator();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::field(long long v) {
    separator();
    out_ << v;
    return *this;
}

void CsvWriter::end_row() {
    if (in_row_ != columns_) {
        throw std::logic_error("CsvWriter: row has " + std::to_string(in_row_) + " fields, header has " +
                               std::to_string(columns_));
    }
    out_ << "\r\n";
    in_row_ = 0;
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<double> parse_column(std::string_view text, bool allow_zero) {
    std::vector<double> out;
    std::size_t line_no = 0;
    bool seen_content = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        const std::string_view raw = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        std::string_view cell = trim(raw);
        if (cell.empty()) {
            continue;
        }
        if (!seen_content) {
            seen_content = true;
            if (cell == "value" || cell == "\"value\"") {
                continue;
            }
        }
        if (cell.find(',') != std::string_view::npos) {
            throw DataError("expected a single column, found '" + std::string(cell) + "'", line_no);
        }
        if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') {
            cell = trim(cell.substr(1, cell.size() - 2));
        }
        if (!cell.empty() && cell.front() == '+') {
            cell.remove_prefix(1);
        }
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size()) {
            throw DataError("not a number: '" + std::string(cell) + "'", line_no);
        }
        if (!std::isfinite(v) || v < 0.0 || (!allow_zero && v == 0.0)) {
            throw DataError(std::string("value must be ") + (allow_zero ? "nonnegative" : "strictly positive") +
                                ", got '" + std::string(cell) + "'",
                            line_no);
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw DataError("no values found");
    }
    return out;
}

}  // namespace

std::vector<double> parse_values_csv(std::string_view text) {
    return parse_column(text, false);
}

std::vector<double> read_values_csv(const std::filesystem::path& path) {
    return parse_column(read_file(path), false);
}

std::vector<double> read_thresholds_csv(const std::filesystem::path& path) {
    return parse_column(read_file(path), true);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256: digest failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < length; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    }
    return hex.str();
}

//==========================================================================
// JSON
//==========================================================================

using nlohmann::json;

json to_json(const GsmParams& params) {
    return json{{"weights", std::vector<double>(params.weights().begin(), params.weights().end())},
                {"theta", params.theta()}};
}

GsmParams gsm_params_from_json(const json& j) {
    if (!j.is_object() || !j.contains("weights") || !j.contains("theta") || !j["weights"].is_array() ||
        !j["theta"].is_number()) {
        throw ConfigError("GSM parameters must be {\"weights\": [...], \"theta\": number}");
    }
    try {
        return GsmParams(j["weights"].get<std::vector<double>>(), j["theta"].get<double>());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("GSM parameters: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

json to_json(const PosteriorDraws& draws) {
    json weights = json::array();
    for (std::size_t m = 0; m < draws.size(); ++m) {
        const auto row = draws.weights(m);
        weights.push_back(std::vector<double>(row.begin(), row.end()));
    }
    const auto theta = draws.theta_draws();
    const auto occupied = draws.occupied_counts();
    return json{{"theta", std::vector<double>(theta.begin(), theta.end())},
                {"weights", std::move(weights)},
                {"occupied", std::vector<std::size_t>(occupied.begin(), occupied.end())},
                {"sum_y", draws.sum_y()}};
}

PosteriorDraws posterior_draws_from_json(const json& j) {
    try {
        const auto theta = j.at("theta").get<std::vector<double>>();
        const auto weights = j.at("weights").get<std::vector<std::vector<double>>>();
        const auto occupied = j.at("occupied").get<std::vector<std::size_t>>();
        const double sum_y = j.value("sum_y", 0.0);
        if (theta.empty() || weights.size() != theta.size() || occupied.size() != theta.size()) {
            throw DataError("draws: theta, weights and occupied must be nonempty and equally long");
        }
        PosteriorDraws draws(weights.front().size(), sum_y);
        for (std::size_t m = 0; m < theta.size(); ++m) {
            if (!(theta[m] > 0.0)) {
                throw DataError("draws: theta must be positive");
            }
            draws.push(weights[m], theta[m], occupied[m]);
        }
        return draws;
    } catch (const json::exception& e) {
        throw DataError(std::string("draws: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("draws: ") + e.what());
    }
}

json to_json(const DiagnosticReport& report) {
    json hist = json::object();
    for (const auto& [count, freq] : report.occupied_hist) {
        hist[std::to_string(count)] = freq;
    }
    return json{{"mean_draws", report.mean_draws},
                {"var_draws", report.var_draws},
                {"sample_mean", report.sample_mean},
                {"sample_var", report.sample_var},
                {"occupied_hist", std::move(hist)},
                {"heaviest_used_component", report.heaviest_used_component},
                {"flags", report.flags}};
}

json to_json(const Hyperparams& hyper) {
    return json{{"J", hyper.n_components}, {"alpha", hyper.alpha}, {"beta", hyper.beta}};
}

json to_json(const LogNormalFit& fit) {
    return json{{"mu_hat", fit.mu_hat}, {"sigma_hat", fit.sigma_hat}};
}

json to_json(const NormalMixtureFit& fit) {
    return json{{"n_components", fit.n_components}, {"means", fit.means},  {"sds", fit.sds},
                {"weights", fit.weights},           {"log_likelihood", fit.log_likelihood}, {"bic", fit.bic}};
}

std::string dump_json(const json& j) {
    return j.dump(2) + "\n";
}

}  // namespace gsm
