#include "config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fastflux/csv.hpp"
#include "fastflux/error.hpp"

namespace fastflux::harness {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what)
{
    throw Error(ErrorCode::invalid_argument, key + ": " + what);
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    const std::string s = trim(v);
    if (s == "nan") return std::nan("");
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) bad(key, "expected a number, got '" + s + "'");
    return x;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v)
{
    const std::string s = trim(v);
    std::uint64_t x = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        bad(key, "expected a non-negative integer, got '" + s + "'");
    return x;
}

std::vector<double> to_list(const std::string& key, const std::string& v)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
    return out;
}

Vec3 to_vec(const std::string& key, const std::string& v)
{
    const auto xs = to_list(key, v);
    if (xs.size() != 3) bad(key, "expected three comma-separated numbers");
    return {xs[0], xs[1], xs[2]};
}

bool to_bool(const std::string& key, const std::string& v)
{
    const std::string s = trim(v);
    if (s == "true") return true;
    if (s == "false") return false;
    bad(key, "expected true or false");
}

std::string list_text(const std::vector<double>& xs)
{
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + format_number(xs[i]);
    return s;
}

std::string vec_text(const Vec3& v) { return list_text({v[0], v[1], v[2]}); }

struct Field {
    std::string key;
    std::string note;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define FF_NUMBER(KEY, MEMBER, NOTE)                                                           \
    Field{KEY, NOTE, [](const ExperimentConfig& c) { return format_number(c.MEMBER); },        \
          [](ExperimentConfig& c, const std::string& v) { c.MEMBER = to_double(KEY, v); }}
#define FF_COUNT(KEY, MEMBER, NOTE)                                                            \
    Field{KEY, NOTE, [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); },       \
          [](ExperimentConfig& c, const std::string& v) {                                      \
              c.MEMBER = static_cast<decltype(c.MEMBER)>(to_unsigned(KEY, v));                 \
          }}
#define FF_TEXT(KEY, MEMBER, NOTE)                                                             \
    Field{KEY, NOTE, [](const ExperimentConfig& c) { return c.MEMBER; },                       \
          [](ExperimentConfig& c, const std::string& v) { c.MEMBER = trim(v); }}
#define FF_VEC(KEY, MEMBER, NOTE)                                                              \
    Field{KEY, NOTE, [](const ExperimentConfig& c) { return vec_text(c.MEMBER); },             \
          [](ExperimentConfig& c, const std::string& v) { c.MEMBER = to_vec(KEY, v); }}
#define FF_LIST(KEY, MEMBER, NOTE)                                                             \
    Field{KEY, NOTE, [](const ExperimentConfig& c) { return list_text(c.MEMBER); },            \
          [](ExperimentConfig& c, const std::string& v) { c.MEMBER = to_list(KEY, v); }}

const std::vector<Field>& fields()
{
    static const std::vector<Field> f{
        FF_TEXT("potential.kind", potential.kind, "zero, gaussian, power_law or point"),
        FF_NUMBER("potential.amplitude", potential.amplitude, "gaussian and power_law strength"),
        FF_NUMBER("potential.width", potential.width, "gaussian width"),
        FF_NUMBER("potential.power", potential.power, "power_law exponent"),
        Field{"potential.claimed_n", "decay class claimed for power_law",
              [](const ExperimentConfig& c) { return std::to_string(c.potential.claimed_n); },
              [](ExperimentConfig& c, const std::string& v) {
                  c.potential.claimed_n = static_cast<int>(to_unsigned("potential.claimed_n", v));
              }},
        FF_NUMBER("potential.claimed_epsilon", potential.claimed_epsilon, ""),
        FF_NUMBER("potential.alpha", potential.alpha, "point interaction boundary parameter"),
        FF_VEC("potential.location", potential.location, "point interaction position"),
        FF_VEC("packet.center", packet.center, ""),
        FF_NUMBER("packet.sigma", packet.sigma, "position spread per axis; normalised after sampling"),
        FF_VEC("packet.momentum", packet.momentum, ""),
        FF_NUMBER("grid.half_width", grid.half_width, ""),
        FF_COUNT("grid.points", grid.points, "per axis, a power of two"),
        FF_NUMBER("kgrid.k_min", k_grid.k_min, ""),
        FF_NUMBER("kgrid.k_max", k_grid.k_max, ""),
        FF_COUNT("kgrid.radial", k_grid.radial, "Gauss-Legendre nodes in |k|"),
        FF_TEXT("kgrid.angular", k_grid.angular, "product or lebedev26"),
        FF_COUNT("kgrid.theta", k_grid.theta, "polar rings of the product rule (twice as many azimuths)"),
        FF_VEC("detector.axis", detector.axis, ""),
        FF_NUMBER("detector.half_angle_deg", detector.half_angle_deg, ""),
        FF_LIST("detector.radii", detector.radii, "R sweep"),
        FF_COUNT("detector.n_theta", detector.n_theta, "cap quadrature"),
        FF_COUNT("detector.n_phi", detector.n_phi, ""),
        FF_NUMBER("time.T", time.T, "start of the flux integral"),
        FF_NUMBER("time.tail_epsilon", time.tail_epsilon, "scan stops once the flux falls below this fraction of its peak"),
        FF_NUMBER("time.t_max", time.t_max, "reach of the scattered-wave expansion"),
        FF_NUMBER("tolerance.solver", tolerance.solver, ""),
        FF_NUMBER("tolerance.flux_rel", tolerance.flux_rel, ""),
        FF_NUMBER("solver.box_half_width", solver.box_half_width, "integral-equation box"),
        FF_COUNT("solver.points", solver.points, ""),
        FF_NUMBER("probe.width", probe.width, "Gaussian symbol width"),
        FF_LIST("probe.times", probe.times, ""),
        FF_COUNT("probe.directions", probe.directions, ""),
        FF_NUMBER("probe.nodes_per_period", probe.nodes_per_period, ""),
        Field{"probe.density_check", "",
              [](const ExperimentConfig& c) { return std::string(c.probe.density_check ? "true" : "false"); },
              [](ExperimentConfig& c, const std::string& v) {
                  c.probe.density_check = to_bool("probe.density_check", v);
              }},
        FF_TEXT("class.name", check.name, "gplus, khat or g0"),
        FF_TEXT("class.symbol", check.symbol, "packet, gaussian, bracket or zero"),
        FF_NUMBER("class.width", check.width, ""),
        FF_NUMBER("class.power", check.power, "exponent of the bracket symbol"),
        FF_TEXT("output.csv", output.csv, "empty writes to stdout"),
        FF_TEXT("output.svg", output.svg, ""),
        FF_TEXT("cache.dir", cache_dir, "overridden by FASTFLUX_CACHE_DIR"),
        FF_COUNT("seed", seed, "sampled residual checks"),
    };
    return f;
}

#undef FF_NUMBER
#undef FF_COUNT
#undef FF_TEXT
#undef FF_VEC
#undef FF_LIST

}  // namespace

ExperimentConfig parse_config(const std::string& text)
{
    std::map<std::string, const Field*> by_key;
    for (const auto& f : fields()) by_key[f.key] = &f;
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') bad("line " + std::to_string(line_no), "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) bad("line " + std::to_string(line_no), "expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        const auto it = by_key.find(key);
        if (it == by_key.end()) bad(key, "unknown key");
        it->second->set(c, line.substr(eq + 1));
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::invalid_argument, "cannot read config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& config)
{
    std::string out, section;
    for (const auto& f : fields()) {
        const auto dot = f.key.find('.');
        const std::string s = dot == std::string::npos ? "" : f.key.substr(0, dot);
        if (s != section && !out.empty()) out += '\n';
        section = s;
        if (!f.note.empty()) out += "# " + f.note + "\n";
        out += f.key + " = " + f.get(config) + "\n";
    }
    return out;
}

void validate(const ExperimentConfig& c)
{
    auto positive = [](const std::string& key, double x) {
        if (!(x > 0.0) || !std::isfinite(x)) bad(key, "must be positive and finite");
    };
    const std::string& kind = c.potential.kind;
    if (kind != "zero" && kind != "gaussian" && kind != "power_law" && kind != "point")
        bad("potential.kind", "unknown kind '" + kind + "'");
    if (kind == "gaussian") positive("potential.width", c.potential.width);
    if (kind == "point" && std::isnan(c.potential.alpha)) bad("potential.alpha", "must be a number or inf");
    positive("packet.sigma", c.packet.sigma);
    positive("grid.half_width", c.grid.half_width);
    if (c.grid.points < 4 || (c.grid.points & (c.grid.points - 1)) != 0)
        bad("grid.points", "must be a power of two of at least 4");
    if (!(c.k_grid.k_min >= 0.0) || !(c.k_grid.k_max > c.k_grid.k_min))
        bad("kgrid.k_max", "need 0 <= k_min < k_max");
    if (c.k_grid.radial == 0) bad("kgrid.radial", "must be positive");
    if (c.k_grid.angular != "product" && c.k_grid.angular != "lebedev26")
        bad("kgrid.angular", "must be product or lebedev26");
    if (c.k_grid.angular == "product" && c.k_grid.theta == 0) bad("kgrid.theta", "must be positive");
    if (norm(c.detector.axis) == 0.0) bad("detector.axis", "must be nonzero");
    if (!(c.detector.half_angle_deg > 0.0 && c.detector.half_angle_deg <= 180.0))
        bad("detector.half_angle_deg", "must lie in (0, 180]");
    if (c.detector.radii.empty()) bad("detector.radii", "need at least one radius");
    if (c.detector.n_theta == 0 || c.detector.n_phi == 0) bad("detector.n_theta", "cap quadrature must be nonempty");
    positive("time.T", c.time.T);
    positive("time.tail_epsilon", c.time.tail_epsilon);
    positive("time.t_max", c.time.t_max);
    positive("tolerance.solver", c.tolerance.solver);
    positive("tolerance.flux_rel", c.tolerance.flux_rel);
    positive("solver.box_half_width", c.solver.box_half_width);
    if (c.solver.points < 4) bad("solver.points", "must be at least 4");
    positive("probe.width", c.probe.width);
    if (c.probe.times.empty()) bad("probe.times", "need at least one time");
    for (double t : c.probe.times) positive("probe.times", t);
    if (c.probe.directions == 0) bad("probe.directions", "must be positive");
    positive("probe.nodes_per_period", c.probe.nodes_per_period);
    if (c.check.name != "gplus" && c.check.name != "khat" && c.check.name != "g0")
        bad("class.name", "must be gplus, khat or g0");
    if (c.check.symbol != "packet" && c.check.symbol != "gaussian" && c.check.symbol != "bracket" &&
        c.check.symbol != "zero")
        bad("class.symbol", "must be packet, gaussian, bracket or zero");
    positive("class.width", c.check.width);
    if (c.cache_dir.empty()) bad("cache.dir", "must not be empty");
}

std::filesystem::path cache_directory(const ExperimentConfig& config)
{
    if (const char* env = std::getenv("FASTFLUX_CACHE_DIR"); env && *env) return env;
    return config.cache_dir;
}

Potential build_potential(const PotentialSpec& s)
{
    if (s.kind == "zero") return make_zero_potential();
    if (s.kind == "gaussian") return make_gaussian_potential(s.amplitude, s.width);
    if (s.kind == "power_law")
        return make_power_law_potential(s.amplitude, s.power, s.claimed_n, s.claimed_epsilon);
    throw Error(ErrorCode::invalid_argument, "potential.kind: '" + s.kind + "' has no potential function");
}

CartesianGrid build_grid(const GridSpec& s) { return CartesianGrid(s.half_width, s.points); }

std::shared_ptr<const SphericalKGrid> build_k_grid(const KGridSpec& s)
{
    const AngularRule rule = s.angular == "lebedev26" ? AngularRule::lebedev26() : AngularRule::product(s.theta, 2 * s.theta);
    return std::make_shared<const SphericalKGrid>(SphericalKGrid::gauss(s.k_min, s.k_max, s.radial, rule));
}

GaussianPacket build_packet(const PacketSpec& s) { return GaussianPacket{s.center, s.sigma, s.momentum}; }

Cap build_cone(const DetectorSpec& s)
{
    return Cap{(1.0 / norm(s.axis)) * s.axis, s.half_angle_deg * pi / 180.0};
}

}  // namespace fastflux::harness
