/*
   Copyright 2026 The invlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "invlab/cli_io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "invlab/errors.hpp"

static_assert(std::endian::native == std::endian::little, "SPF1 I/O assumes a little-endian host");

namespace invlab {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

void RunConfig::apply(ExperimentConfig& cfg) const {
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (mode) cfg.mode = *mode;
}

namespace {

const double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void bad_type(const std::string& key, const char* want) {
    throw ValidationError("configuration key '" + key + "' must be " + want);
}

double as_number(const json& v, const std::string& key) {
    if (!v.is_number()) bad_type(key, "a number");
    return v.get<double>();
}

// Exponents p and r accept "inf".
double as_exponent(const json& v, const std::string& key) {
    if (v.is_string()) {
        if (v.get<std::string>() == "inf") return kInf;
        bad_type(key, "a number or \"inf\"");
    }
    return as_number(v, key);
}

int as_int(const json& v, const std::string& key) {
    if (!v.is_number_integer()) bad_type(key, "an integer");
    return v.get<int>();
}

std::vector<int> as_int_list(const json& v, const std::string& key) {
    if (!v.is_array()) bad_type(key, "an array of integers");
    std::vector<int> out;
    for (const auto& e : v) out.push_back(as_int(e, key));
    return out;
}

std::vector<double> as_list(const json& v, const std::string& key) {
    if (!v.is_array()) bad_type(key, "an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(as_number(e, key));
    return out;
}

std::optional<double> as_optional(const json& v, const std::string& key) {
    if (v.is_null()) return std::nullopt;
    return as_number(v, key);
}

json exponent_json(double x) { return std::isinf(x) ? json("inf") : json(x); }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view bytes) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ArgumentError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ArgumentError("write failed for " + path.string());
}

} // namespace

ExperimentConfig parse_config_text(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("configuration is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("configuration must be a JSON object");

    ExperimentConfig cfg;
    for (const auto& [key, v] : j.items()) {
        if (key == "d") cfg.bp.d = as_int(v, key);
        else if (key == "s") cfg.bp.s = as_number(v, key);
        else if (key == "p") cfg.bp.p = as_exponent(v, key);
        else if (key == "r") cfg.bp.r = as_exponent(v, key);
        else if (key == "R") cfg.radius = as_number(v, key);
        else if (key == "N") cfg.samples = as_int(v, key);
        else if (key == "grid_policy") {
            const std::string s = v.is_string() ? v.get<std::string>() : "";
            if (s == "per_n") cfg.grid_policy = GridPolicy::per_n;
            else if (s == "fixed") cfg.grid_policy = GridPolicy::fixed;
            else bad_type(key, "\"per_n\" or \"fixed\"");
        } else if (key == "n_list") cfg.n_list = as_int_list(v, key);
        else if (key == "t_grid") cfg.t_grid = as_list(v, key);
        else if (key == "T0") cfg.T0 = as_number(v, key);
        else if (key == "t0") cfg.t0 = as_number(v, key);
        else if (key == "eps_sweep") cfg.eps_sweep = as_list(v, key);
        else if (key == "limit_n") cfg.limit_n = as_int(v, key);
        else if (key == "seed") {
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
                bad_type(key, "a nonnegative integer");
            }
            cfg.seed = v.get<std::uint64_t>();
        } else if (key == "shift_k") cfg.shift_k = as_optional(v, key);
        else if (key == "mode") {
            const std::string s = v.is_string() ? v.get<std::string>() : "";
            if (s == "relaxed") cfg.mode = Strictness::relaxed;
            else if (s == "strict") cfg.mode = Strictness::strict;
            else bad_type(key, "\"strict\" or \"relaxed\"");
        } else if (key == "cfl") cfg.cfl = as_number(v, key);
        else if (key == "psi_band") cfg.psi_band = as_int(v, key);
        else if (key == "psi_scale") cfg.psi_scale = as_number(v, key);
        else if (key == "residual_n_list") cfg.residual_n_list = as_int_list(v, key);
        else if (key == "thm13_n_list") cfg.thm13_n_list = as_int_list(v, key);
        else if (key == "quadrature_step") cfg.quadrature_step = as_number(v, key);
        else if (key == "width_override") cfg.width_override = as_optional(v, key);
        else if (key == "U_radius") cfg.U_radius = as_number(v, key);
        else if (key == "threads") cfg.threads = as_int(v, key);
        else throw ValidationError("unknown configuration key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
    json j;
    j["d"] = cfg.bp.d;
    j["s"] = cfg.bp.s;
    j["p"] = exponent_json(cfg.bp.p);
    j["r"] = exponent_json(cfg.bp.r);
    j["R"] = cfg.radius;
    j["N"] = cfg.samples;
    j["grid_policy"] = cfg.grid_policy == GridPolicy::fixed ? "fixed" : "per_n";
    j["n_list"] = cfg.n_list;
    j["t_grid"] = cfg.t_grid;
    j["T0"] = cfg.T0;
    j["t0"] = cfg.t0;
    j["eps_sweep"] = cfg.eps_sweep;
    j["limit_n"] = cfg.limit_n;
    j["seed"] = cfg.seed;
    j["shift_k"] = cfg.shift_k ? json(*cfg.shift_k) : json(nullptr);
    j["mode"] = cfg.mode == Strictness::strict ? "strict" : "relaxed";
    j["cfl"] = cfg.cfl;
    j["psi_band"] = cfg.psi_band;
    j["psi_scale"] = cfg.psi_scale;
    j["residual_n_list"] = cfg.residual_n_list;
    j["thm13_n_list"] = cfg.thm13_n_list;
    j["quadrature_step"] = cfg.quadrature_step;
    j["width_override"] = cfg.width_override ? json(*cfg.width_override) : json(nullptr);
    j["U_radius"] = cfg.U_radius;
    j["threads"] = cfg.threads;
    return j.dump(2) + "\n";
}

fs::path write_config_echo(const ExperimentConfig& cfg, const fs::path& out_dir) {
    const fs::path path = out_dir / "config.echo.json";
    write_file(path, config_to_json_text(cfg));
    return path;
}

ExperimentConfig parse_config(const fs::path& path, const std::optional<fs::path>& echo_dir) {
    ExperimentConfig cfg = parse_config_text(read_file(path));
    if (echo_dir) write_config_echo(cfg, *echo_dir);
    return cfg;
}

// ---------------------------------------------------------------------------
// SPF1

namespace {

template <class T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <class T>
    T get() {
        if (pos_ + sizeof(T) > bytes_.size()) throw FormatError("SPF1: truncated input");
        T value;
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

struct Header {
    int dim;
    int n;
    double radius;
    int kind;
    int ncomp;
};

void put_header(std::string& out, const Grid& g, int kind, int ncomp) {
    out.append("SPF1");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
    for (int a = 0; a < g.dim(); ++a) put<std::uint32_t>(out, static_cast<std::uint32_t>(g.n()));
    put<double>(out, g.radius());
    put<std::uint8_t>(out, static_cast<std::uint8_t>(kind));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(ncomp));
}

Header get_header(Reader& in, std::string_view bytes) {
    if (bytes.size() < 4 || bytes.substr(0, 4) != "SPF1") throw FormatError("SPF1: bad magic");
    for (int i = 0; i < 4; ++i) in.get<char>();
    Header h{};
    const auto d = in.get<std::uint32_t>();
    if (d != 2 && d != 3) throw FormatError("SPF1: unsupported dimension " + std::to_string(d));
    h.dim = static_cast<int>(d);
    for (int a = 0; a < h.dim; ++a) {
        const auto n = in.get<std::uint32_t>();
        if (a == 0) h.n = static_cast<int>(n);
        else if (static_cast<int>(n) != h.n) throw FormatError("SPF1: unequal axis sizes are not supported");
    }
    h.radius = in.get<double>();
    h.kind = in.get<std::uint8_t>();
    h.ncomp = in.get<std::uint8_t>();
    if (h.kind > 1) throw FormatError("SPF1: unknown kind " + std::to_string(h.kind));
    if (h.ncomp < 1) throw FormatError("SPF1: no components");
    try {
        (void)Grid(h.dim, h.n, h.radius);
    } catch (const ConfigurationError& e) {
        throw FormatError(std::string("SPF1: invalid grid: ") + e.what());
    }
    return h;
}

// FFT index holding the k-th entry of the -N/2 .. N/2 - 1 ordering.
int shifted_index(int k, int n) { return (k + n / 2) % n; }

std::size_t spectral_flat(const Grid& g, std::size_t ordinal) {
    std::array<int, 3> idx{0, 0, 0};
    const auto pos = g.unflatten(ordinal);
    for (int a = 0; a < g.dim(); ++a) idx[a] = shifted_index(pos[a], g.n());
    return g.flat_index(idx);
}

} // namespace

std::string encode_field(const VectorField& v) {
    const Grid& g = v.grid();
    std::string out;
    out.reserve(32 + v.components().size() * g.size() * 16);
    put_header(out, g, 1, v.dim());
    for (const auto& c : v.components()) {
        for (std::size_t o = 0; o < g.size(); ++o) {
            const Complex z = c.coeffs()[static_cast<Eigen::Index>(spectral_flat(g, o))];
            put<double>(out, z.real());
            put<double>(out, z.imag());
        }
    }
    return out;
}

std::string encode_real_field(const std::vector<RealField>& components) {
    if (components.empty()) throw ArgumentError("encode_real_field: no components");
    const Grid& g = components.front().grid();
    std::string out;
    put_header(out, g, 0, static_cast<int>(components.size()));
    for (const auto& c : components) {
        require_same_grid(c.grid(), g, "encode_real_field");
        for (Eigen::Index i = 0; i < c.values().size(); ++i) put<double>(out, c.values()[i]);
    }
    return out;
}

int field_kind(std::string_view bytes) {
    Reader in(bytes);
    return get_header(in, bytes).kind;
}

std::vector<RealField> decode_real_field(std::string_view bytes) {
    Reader in(bytes);
    const Header h = get_header(in, bytes);
    if (h.kind != 0) throw FormatError("SPF1: expected real samples");
    const Grid g(h.dim, h.n, h.radius);
    if (in.remaining() != static_cast<std::size_t>(h.ncomp) * g.size() * 8) {
        throw FormatError("SPF1: payload size does not match the header");
    }
    std::vector<RealField> out;
    for (int c = 0; c < h.ncomp; ++c) {
        Eigen::ArrayXd values(g.size());
        for (Eigen::Index i = 0; i < values.size(); ++i) values[i] = in.get<double>();
        out.emplace_back(g, std::move(values));
    }
    return out;
}

VectorField decode_field(std::string_view bytes) {
    Reader in(bytes);
    const Header h = get_header(in, bytes);
    if (h.kind == 0) return to_spectral(decode_real_field(bytes));
    const Grid g(h.dim, h.n, h.radius);
    if (in.remaining() != static_cast<std::size_t>(h.ncomp) * g.size() * 16) {
        throw FormatError("SPF1: payload size does not match the header");
    }
    std::vector<SpectralField> comps;
    for (int c = 0; c < h.ncomp; ++c) {
        SpectralField f(g);
        for (std::size_t o = 0; o < g.size(); ++o) {
            const double re = in.get<double>(), im = in.get<double>();
            f.coeffs()[static_cast<Eigen::Index>(spectral_flat(g, o))] = Complex(re, im);
        }
        comps.push_back(std::move(f));
    }
    return VectorField(std::move(comps));
}

void write_field(const fs::path& path, const VectorField& v) { write_file(path, encode_field(v)); }

void write_real_field(const fs::path& path, const std::vector<RealField>& components) {
    write_file(path, encode_real_field(components));
}

VectorField read_field(const fs::path& path) {
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const ArgumentError& e) {
        throw FormatError(e.what());
    }
    return decode_field(bytes);
}

std::vector<RealField> read_real_field(const fs::path& path) {
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const ArgumentError& e) {
        throw FormatError(e.what());
    }
    return decode_real_field(bytes);
}

void write_trajectory(const fs::path& out_dir, const std::string& run_id, const Trajectory& traj) {
    const fs::path dir = out_dir / "traj" / run_id;
    write_field(dir / "initial.spf", traj.initial());
    std::string times = "index,t\n";
    char buf[160];
    for (std::size_t i = 0; i < traj.size(); ++i) {
        write_field(dir / ("t" + std::to_string(i) + ".spf"), traj.state(i));
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, traj.time(i));
        times += buf;
    }
    write_file(dir / "samples.csv", times);
    std::string diag = "t,dt,energy,divergence,max_speed\n";
    for (const auto& s : traj.steps()) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.dt, s.energy, s.divergence,
                      s.max_speed);
        diag += buf;
    }
    write_file(dir / "diagnostics.csv", diag);
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string record_key(const ResultRecord& r) {
    std::string key = r.experiment + "." + r.quantity;
    if (r.n) key += ".n=" + std::to_string(*r.n);
    if (r.eps) key += ".eps=" + number(*r.eps);
    if (r.t) key += ".t=" + number(*r.t);
    return key;
}

bool is_constant(const std::string& q) {
    for (const char* prefix : {"slope_", "ratio_n_", "bracket_lo", "bracket_hi", "c0_proxy", "C_meas_",
                               "sweep_factor", "uniform_bound"}) {
        if (q.rfind(prefix, 0) == 0) return true;
    }
    return false;
}

} // namespace

std::string records_csv(const std::vector<ResultRecord>& records) {
    std::set<std::tuple<std::string, std::optional<int>, std::optional<double>, std::optional<double>, std::string>>
        seen;
    std::string out = "experiment,n,eps,t,quantity,value,verdict\n";
    for (const auto& r : records) {
        if (!std::isfinite(r.value)) throw ArgumentError("record " + record_key(r) + " has a non-finite value");
        if (!seen.emplace(r.experiment, r.n, r.eps, r.t, r.quantity).second) {
            throw ArgumentError("duplicate record key " + record_key(r));
        }
        out += r.experiment;
        out += ',';
        if (r.n) out += std::to_string(*r.n);
        out += ',';
        if (r.eps) out += number(*r.eps);
        out += ',';
        if (r.t) out += number(*r.t);
        out += ',';
        out += r.quantity;
        out += ',';
        out += number(r.value);
        out += ',';
        out += to_string(r.verdict);
        out += '\n';
    }
    return out;
}

std::string summary_json(const std::vector<ResultRecord>& records, std::uint64_t seed) {
    std::size_t pass = 0, fail = 0, info = 0;
    json constants = json::object();
    json failures = json::array();
    std::vector<std::string> experiments;
    for (const auto& r : records) {
        if (r.verdict == Verdict::pass) ++pass;
        else if (r.verdict == Verdict::fail) {
            ++fail;
            failures.push_back(record_key(r));
        } else ++info;
        if (is_constant(r.quantity)) constants[record_key(r)] = r.value;
        if (std::find(experiments.begin(), experiments.end(), r.experiment) == experiments.end()) {
            experiments.push_back(r.experiment);
        }
    }
    json j;
    j["seed"] = std::to_string(seed);
    j["experiments"] = experiments;
    j["counts"] = {{"pass", pass}, {"fail", fail}, {"info", info}, {"records", records.size()}};
    j["failures"] = failures;
    j["constants"] = constants;
    return j.dump(2) + "\n";
}

ReportPaths write_report(const std::vector<ResultRecord>& records, const fs::path& out_dir, std::uint64_t seed) {
    ReportPaths paths{out_dir / "records.csv", out_dir / "summary.json"};
    const std::string csv = records_csv(records);
    write_file(paths.csv, csv);
    write_file(paths.summary, summary_json(records, seed));
    return paths;
}

} // namespace invlab
