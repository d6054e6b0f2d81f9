#include "replens/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "replens/closed_form.hpp"
#include "replens/gaussian_dynamics.hpp"

namespace replens::cli {

namespace {

[[noreturn]] void malformed(const std::string& what)
{
    throw DatumError(DatumError::Kind::malformed, what);
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep))
        out.push_back(item);
    if (!s.empty() && s.back() == sep)
        out.emplace_back();
    return out;
}

bool parse_double(const std::string& text, double& value)
{
    const std::string s = trim(text);
    if (s.empty())
        return false;
    char* end = nullptr;
    value = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(value);
}

double number_or_throw(const std::string& text, const std::string& what)
{
    double v = 0.0;
    if (!parse_double(text, v))
        malformed("cannot read " + what + " from '" + text + "'");
    return v;
}

// Parses `k1=v1,k2=v2` into the named slots; every key must be known, required keys must appear.
std::map<std::string, double> parse_keyed(const std::string& body, const std::vector<std::string>& required,
                                          const std::map<std::string, double>& defaults)
{
    std::map<std::string, double> values = defaults;
    for (const std::string& part : split(body, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos)
            malformed("expected key=value in '" + part + "'");
        const std::string key = trim(part.substr(0, eq));
        const bool known = std::find(required.begin(), required.end(), key) != required.end() || defaults.count(key);
        if (!known)
            malformed("unknown key '" + key + "'");
        values[key] = number_or_throw(part.substr(eq + 1), key);
    }
    for (const auto& key : required)
        if (!values.count(key))
            malformed("missing key '" + key + "'");
    return values;
}

GaussianDatum parse_gaussian_body(const std::string& body)
{
    const auto v = parse_keyed(body, {"a"}, {{"m", 0.0}});
    return {v.at("a"), v.at("m")};
}

CustomDatum laplace_datum(double rate, double m)
{
    if (!(rate > 0.0))
        malformed("exponential rate must be positive");
    CustomDatum c;
    c.density = [rate, m](double y) { return 0.5 * rate * std::exp(-rate * std::abs(y - m)); };
    c.log_density = [rate, m](double y) { return std::log(0.5 * rate) - rate * std::abs(y - m); };
    c.tail = tail::SubGaussian{};
    const double reach = 60.0 / rate;
    c.suggested_domain = {m - reach, m + reach};
    return c;
}

struct RunConfig {
    std::string fitness = "harmonic";
    double sigma = 1.0;
    std::vector<std::string> data;
    std::string t_range;
    std::string x_range;
    std::string times;
    double tol = 0.0;
    double mass_tol = 1e-8;
    bool renormalize = false;
    double half_width = 0.0;
    int nx = 801;
    double dt = 1e-4;
    std::string snapshots;
    std::string method = "automatic";
    std::string out;
    std::string format = "csv";
    bool quiet = false;
    bool progress = false;
};

EvalOptions eval_options(const RunConfig& cfg)
{
    EvalOptions o;
    o.moments.quad.rel_tol = cfg.tol > 0.0 ? cfg.tol : default_tolerance();
    return o;
}

ValidatedDatum load_datum(const RunConfig& cfg, const std::string& literal)
{
    ValidationOptions vo;
    vo.tol = cfg.mass_tol;
    vo.renormalize_table = cfg.renormalize;
    return validate_datum(parse_datum_literal(literal), vo);
}

const std::string& single_datum(const RunConfig& cfg)
{
    if (cfg.data.size() != 1)
        malformed("this command takes exactly one --datum");
    return cfg.data.front();
}

void emit(const RunConfig& cfg, std::ostream& out, const std::function<void(std::ostream&)>& body)
{
    if (cfg.out.empty() || cfg.out == "-") {
        body(out);
        return;
    }
    std::ofstream file(cfg.out, std::ios::binary);
    if (!file)
        throw std::runtime_error("cannot open output file " + cfg.out);
    body(file);
}

void emit_json(const RunConfig& cfg, std::ostream& out, const nlohmann::json& j)
{
    emit(cfg, out, [&j](std::ostream& os) { os << j.dump(2) << '\n'; });
}

void write_status_sidecar(const RunConfig& cfg, const nlohmann::json& status)
{
    if (cfg.out.empty() || cfg.out == "-")
        return;
    std::ofstream file(cfg.out + ".status.json", std::ios::binary);
    file << status.dump(2) << '\n';
}

std::vector<double> time_samples(const RunConfig& cfg)
{
    if (!cfg.times.empty()) {
        std::vector<double> ts;
        for (const auto& p : split(cfg.times, ','))
            ts.push_back(number_or_throw(p, "time"));
        return ts;
    }
    if (cfg.t_range.empty())
        throw std::invalid_argument("--t lo:hi:step is required");
    return parse_range(cfg.t_range).values();
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const Parameters params(cfg.sigma, parse_fitness(cfg.fitness));
    const SolutionField field(params, load_datum(cfg, single_datum(cfg)), eval_options(cfg));
    const std::vector<double> ts = time_samples(cfg);
    if (cfg.x_range.empty())
        throw std::invalid_argument("--x lo:hi:step is required");
    const std::vector<double> xs = parse_range(cfg.x_range).values();

    const double cutoff = std::min(field.extinction_time(), params.fitness() == FitnessSign::inverted
                                                                ? params.t_heat()
                                                                : kInf);
    if (std::all_of(ts.begin(), ts.end(), [cutoff](double t) { return t >= cutoff; })) {
        err << "replens: the whole t-range lies after the extinction time T = " << format_number(cutoff) << '\n';
        return kExtinctBeforeRange;
    }

    CsvTable table{{"t", "x", "u"}, {}};
    std::size_t extinct_rows = 0;
    double first_extinct = kInf;
    for (double t : ts) {
        const std::vector<FieldValue> u = field.u(t, xs);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (u[i].extinct()) {
                ++extinct_rows;
                first_extinct = std::min(first_extinct, t);
            }
            table.rows.push_back({t, xs[i], u[i].u});
        }
    }

    if (cfg.format == "json") {
        nlohmann::json j;
        j["columns"] = table.header;
        j["rows"] = table.rows;
        j["status"] = extinct_rows ? "extinct" : "alive";
        emit_json(cfg, out, j);
    } else {
        emit(cfg, out, [&table](std::ostream& os) { write_csv(os, table); });
    }
    if (extinct_rows) {
        nlohmann::json status;
        status["status"] = "extinct";
        status["extinction_time"] = cutoff;
        status["first_extinct_t"] = first_extinct;
        status["extinct_rows"] = extinct_rows;
        write_status_sidecar(cfg, status);
    }
    return kSuccess;
}

int cmd_meanfitness(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const Parameters params(cfg.sigma, parse_fitness(cfg.fitness));
    const SolutionField field(params, load_datum(cfg, single_datum(cfg)), eval_options(cfg));
    CsvTable table{{"t", "fbar", "second_moment"}, {}};
    std::size_t extinct_rows = 0;
    for (double t : time_samples(cfg)) {
        const auto m2 = field.second_moment(t);
        if (!m2) {
            ++extinct_rows;
            continue;
        }
        const double sign = params.fitness() == FitnessSign::harmonic ? -1.0 : 1.0;
        table.rows.push_back({t, sign * *m2, *m2});
    }
    if (table.rows.empty()) {
        err << "replens: mean fitness is undefined on the whole t-range (extinct)\n";
        return kExtinctBeforeRange;
    }
    if (cfg.format == "json") {
        nlohmann::json j;
        j["columns"] = table.header;
        j["rows"] = table.rows;
        emit_json(cfg, out, j);
    } else {
        emit(cfg, out, [&table](std::ostream& os) { write_csv(os, table); });
    }
    if (extinct_rows) {
        nlohmann::json status;
        status["status"] = "extinct";
        status["extinction_time"] = field.extinction_time();
        status["extinct_rows"] = extinct_rows;
        write_status_sidecar(cfg, status);
    }
    return kSuccess;
}

int cmd_extinct(const RunConfig& cfg, std::ostream& out)
{
    if (cfg.method != "automatic" && cfg.method != "bisection")
        throw std::invalid_argument("--method must be automatic or bisection");
    std::vector<LabeledDatum> data;
    for (const auto& literal : cfg.data)
        data.push_back({literal, load_datum(cfg, literal)});
    const auto method = cfg.method == "bisection" ? ExtinctionMethod::bisection : ExtinctionMethod::automatic;
    const std::vector<PhaseRow> rows = phase_diagram(data, cfg.sigma, method);
    emit_json(cfg, out, to_json(rows, cfg.sigma));
    return kSuccess;
}

int cmd_converge(const RunConfig& cfg, std::ostream& out)
{
    const ValidatedDatum d = load_datum(cfg, single_datum(cfg));
    const std::vector<double> ts = time_samples(cfg);
    std::vector<double> xs;
    if (!cfg.x_range.empty())
        xs = parse_range(cfg.x_range).values();
    const ConvergenceReport r = deviation_profile(d, cfg.sigma, ts, xs, eval_options(cfg));
    emit_json(cfg, out, to_json(r));
    return kSuccess;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const Parameters params(cfg.sigma, parse_fitness(cfg.fitness));
    const ValidatedDatum d = load_datum(cfg, single_datum(cfg));
    const std::vector<double> ts = time_samples(cfg);
    const double t_end = *std::max_element(ts.begin(), ts.end());

    OracleConfig oc;
    oc.half_width = cfg.half_width > 0.0 ? cfg.half_width : default_half_width(d, cfg.sigma, params.fitness(), t_end);
    oc.nx = cfg.nx;
    oc.dt = cfg.dt;
    oc.renormalize = cfg.renormalize;
    oc.snapshot_times = ts;
    if (cfg.progress && !cfg.quiet)
        oc.progress = [&err](double f) { err << "oracle: " << static_cast<int>(std::lround(100.0 * f)) << "%\n"; };

    const OracleTrajectory traj = solve_oracle(d, cfg.sigma, params.fitness(), t_end, oc);
    const SolutionField field(params, d, eval_options(cfg));
    const ErrorReport rep = compare(traj, field, std::min(ts.front(), t_end));

    nlohmann::json j = to_json(rep);
    j["config"] = {{"fitness", cfg.fitness},          {"sigma", cfg.sigma}, {"L", oc.half_width},
                   {"nx", oc.nx},                     {"dt", oc.dt},        {"renormalize", oc.renormalize}};
    j["mass_drift"] = mass_drift(traj);
    j["clipped_points"] = traj.clipped_points;
    emit_json(cfg, out, j);

    if (!cfg.snapshots.empty()) {
        std::ofstream file(cfg.snapshots, std::ios::binary);
        CsvTable table{{"t", "x", "u"}, {}};
        for (std::size_t s = 0; s < traj.times.size(); ++s)
            for (std::size_t i = 0; i < traj.grid.size(); ++i)
                table.rows.push_back({traj.times[s], traj.grid[i], traj.snapshots[s][i]});
        write_csv(file, table);
    }
    return kSuccess;
}

} // namespace

std::vector<double> Range::values() const
{
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i)
        out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

Range parse_range(const std::string& text)
{
    const auto parts = split(text, ':');
    Range r;
    if (parts.size() != 3 || !parse_double(parts[0], r.lo) || !parse_double(parts[1], r.hi) ||
        !parse_double(parts[2], r.step))
        throw std::invalid_argument("range must look like lo:hi:step, got '" + text + "'");
    if (!(r.step > 0.0) || r.hi < r.lo)
        throw std::invalid_argument("range needs step > 0 and hi >= lo, got '" + text + "'");
    return r;
}

InitialDatum parse_datum_literal(const std::string& text)
{
    const auto colon = text.find(':');
    const std::string kind = trim(text.substr(0, colon));
    const std::string body = colon == std::string::npos ? std::string{} : text.substr(colon + 1);

    if (kind == "gaussian")
        return parse_gaussian_body(body);
    if (kind == "exponential") {
        const auto v = parse_keyed(body, {"rate"}, {{"m", 0.0}});
        return laplace_datum(v.at("rate"), v.at("m"));
    }
    if (kind == "table") {
        if (trim(body).empty())
            malformed("table literal needs a path");
        return read_table(trim(body));
    }
    if (kind == "mixture") {
        MixtureDatum mix;
        for (const std::string& term : split(body, ';')) {
            const auto star = term.find('*');
            if (star == std::string::npos)
                malformed("mixture term needs <weight>*gaussian:..., got '" + term + "'");
            const std::string inner = trim(term.substr(star + 1));
            if (inner.rfind("gaussian:", 0) != 0)
                malformed("mixture components must be gaussian literals");
            mix.weights.push_back(number_or_throw(term.substr(0, star), "mixture weight"));
            mix.components.push_back(parse_gaussian_body(inner.substr(9)));
        }
        if (mix.components.empty())
            malformed("empty mixture");
        return mix;
    }
    if (kind == "custom")
        malformed("custom data are reserved for library use");
    malformed("unknown datum kind '" + kind + "'");
}

std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& os, const CsvTable& table)
{
    for (std::size_t i = 0; i < table.header.size(); ++i)
        os << (i ? "," : "") << table.header[i];
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << format_number(row[i]);
        os << '\n';
    }
}

CsvTable read_csv(std::istream& is)
{
    CsvTable t;
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("CSV input is empty; a header is mandatory");
    t.header = split(line, ',');
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::vector<double> row;
        for (const auto& cell : split(line, ','))
            row.push_back(number_or_throw(cell, "CSV cell"));
        if (row.size() != t.header.size())
            throw std::invalid_argument("CSV row width does not match the header");
        t.rows.push_back(std::move(row));
    }
    return t;
}

TabulatedDatum read_table(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        malformed("cannot open table " + path.string());
    TabulatedDatum t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (trim(line).empty())
            continue;
        const auto cells = split(line, ',');
        double x = 0.0, u = 0.0;
        const bool numeric = cells.size() == 2 && parse_double(cells[0], x) && parse_double(cells[1], u);
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            malformed("table rows must be two numeric columns x,u0: '" + line + "'");
        }
        first = false;
        t.nodes.push_back(x);
        t.values.push_back(u);
    }
    return t;
}

nlohmann::json to_json(const ConvergenceReport& r)
{
    return {{"sigma", r.sigma},   {"times", r.times},           {"sup_deviation", r.sup_deviation},
            {"scaled", r.scaled}, {"C_estimate", r.C_estimate}};
}

nlohmann::json to_json(const ErrorReport& r)
{
    return {{"times", r.times},
            {"linf", r.linf},
            {"l1", r.l1},
            {"fbar_deviation", r.fbar_deviation},
            {"max_linf", r.max_linf},
            {"max_l1", r.max_l1},
            {"max_fbar_deviation", r.max_fbar_deviation}};
}

nlohmann::json to_json(std::span<const PhaseRow> rows, double sigma)
{
    nlohmann::json list = nlohmann::json::array();
    for (const auto& r : rows)
        list.push_back({{"label", r.label},
                        {"tail", to_string(r.tail)},
                        {"T", r.extinction_time},
                        {"T_over_T_heat", r.ratio_to_heat},
                        {"source", to_string(r.source)}});
    return {{"sigma", sigma}, {"t_heat", heat_cap(sigma)}, {"rows", list}};
}

std::filesystem::path schema_dir() { return REPLENS_SCHEMA_DIR; }

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Explicit solutions of the replicator-mutator equation with quadratic fitness", "replens"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto common = [&cfg](CLI::App* sub, bool with_fitness) {
        if (with_fitness)
            sub->add_option("--fitness", cfg.fitness, "harmonic (f = -x^2) or inverted (f = +x^2)")
                ->check(CLI::IsMember({"harmonic", "inverted"}));
        sub->add_option("--sigma", cfg.sigma, "diffusion scale sigma > 0");
        sub->add_option("--datum", cfg.data, "initial datum literal")->required();
        sub->add_option("--tol", cfg.tol, "relative quadrature tolerance (default REPLENS_TOL or 1e-11)");
        sub->add_option("--mass-tol", cfg.mass_tol, "tolerance on the unit mass of the datum");
        sub->add_flag("--renormalize", cfg.renormalize, "rescale tabulated data to unit mass");
        sub->add_option("--out,-o", cfg.out, "output path (stdout when omitted)");
        sub->add_flag("--quiet", cfg.quiet, "silence progress output");
        sub->add_flag("--progress", cfg.progress, "report oracle progress on stderr");
    };

    CLI::App* evaluate = app.add_subcommand("evaluate", "u(t, x) on a grid as CSV rows t,x,u");
    common(evaluate, true);
    evaluate->add_option("--t", cfg.t_range, "time range lo:hi:step");
    evaluate->add_option("--times", cfg.times, "comma separated times (instead of --t)");
    evaluate->add_option("--x", cfg.x_range, "space range lo:hi:step");
    evaluate->add_option("--format", cfg.format, "output format (default csv)")->check(CLI::IsMember({"csv", "json"}));

    CLI::App* meanfit = app.add_subcommand("meanfitness", "CSV rows t,fbar,second_moment");
    common(meanfit, true);
    meanfit->add_option("--t", cfg.t_range, "time range lo:hi:step");
    meanfit->add_option("--times", cfg.times, "comma separated times (instead of --t)");
    meanfit->add_option("--format", cfg.format, "output format (default csv)")->check(CLI::IsMember({"csv", "json"}));

    CLI::App* extinct = app.add_subcommand("extinct", "extinction phase diagram (JSON) for f = +x^2");
    common(extinct, false);
    extinct->add_option("--method", cfg.method, "automatic or bisection");

    CLI::App* converge = app.add_subcommand("converge", "sup-norm deviation from psi (JSON) for f = -x^2");
    common(converge, false);
    converge->add_option("--t", cfg.t_range, "time range lo:hi:step");
    converge->add_option("--times", cfg.times, "comma separated times (instead of --t)");
    converge->add_option("--x", cfg.x_range, "sup grid lo:hi:step (automatic when omitted)");

    CLI::App* oracle = app.add_subcommand("oracle", "finite-difference oracle vs closed form (JSON)");
    common(oracle, true);
    oracle->add_option("--t", cfg.t_range, "snapshot times lo:hi:step; the last one is t_end");
    oracle->add_option("--times", cfg.times, "comma separated snapshot times (instead of --t)");
    oracle->add_option("--L", cfg.half_width, "domain half width (automatic when omitted)");
    oracle->add_option("--nx", cfg.nx, "grid points (odd, >= 201)");
    oracle->add_option("--dt", cfg.dt, "time step");
    oracle->add_option("--snapshots", cfg.snapshots, "also write snapshots as CSV t,x,u");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "replens: " << e.what() << '\n';
        return kInvalidInput;
    }

    try {
        if (!(cfg.sigma > 0.0))
            throw std::invalid_argument("--sigma must be positive");
        if (evaluate->parsed())
            return cmd_evaluate(cfg, out, err);
        if (meanfit->parsed())
            return cmd_meanfitness(cfg, out, err);
        if (extinct->parsed())
            return cmd_extinct(cfg, out);
        if (converge->parsed())
            return cmd_converge(cfg, out);
        return cmd_oracle(cfg, out, err);
    } catch (const DatumError& e) {
        err << "replens: invalid datum: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const std::invalid_argument& e) {
        err << "replens: invalid input: " << e.what() << '\n';
        return kInvalidInput;
    } catch (const OracleError& e) {
        err << "replens: oracle: " << e.what() << '\n';
        return e.kind() == OracleError::Kind::bad_config ? kInvalidInput : kOracleInstability;
    } catch (const std::exception& e) {
        err << "replens: " << e.what() << '\n';
        return 1;
    }
}

} // namespace replens::cli
