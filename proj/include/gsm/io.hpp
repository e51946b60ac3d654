#pragma once

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gsm/baselines.hpp"
#include "gsm/calibrate.hpp"
#include "gsm/model.hpp"
#include "gsm/sampler.hpp"

namespace gsm {

//! Malformed input data (bad value, wrong shape). Carries a 1-based line number when known.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& what, std::size_t line = 0);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

//! Configuration document that violates its schema.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

//! Shortest round-trip decimal representation; "NA" for NaN.
std::string format_double(double v);

//! RFC 4180 writer: CRLF line endings, fields quoted only when needed.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> header);

    CsvWriter& field(std::string_view text);
    CsvWriter& field(double v);
    CsvWriter& field(std::size_t v);
    CsvWriter& field(long long v);
    void end_row();

private:
    void separator();

    std::ostream& out_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
};

//! Parses a single-column CSV of strictly positive reals with an optional "value" header.
std::vector<double> parse_values_csv(std::string_view text);
std::vector<double> read_values_csv(const std::filesystem::path& path);
//! Same layout, but allows zero (thresholds).
std::vector<double> read_thresholds_csv(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
//! Lowercase hex SHA-256 of the raw bytes.
std::string sha256_hex(std::string_view bytes);

// JSON layouts.

nlohmann::json to_json(const GsmParams& params);
GsmParams gsm_params_from_json(const nlohmann::json& j);

//! {"theta":[...], "weights":[[...]], "occupied":[...], "sum_y": r}
nlohmann::json to_json(const PosteriorDraws& draws);
PosteriorDraws posterior_draws_from_json(const nlohmann::json& j);

//! {"mean_draws":[...], "var_draws":[...], "sample_mean":r, "sample_var":r, "occupied_hist":{...}, "flags":[...]}
nlohmann::json to_json(const DiagnosticReport& report);

nlohmann::json to_json(const Hyperparams& hyper);
nlohmann::json to_json(const LogNormalFit& fit);
nlohmann::json to_json(const NormalMixtureFit& fit);

//! Stable two-space-indented dump with a trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace gsm
