#include "farfield/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace farfield {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void bad(int line, const std::string& msg) {
    throw Error(ErrorKind::Scenario, fmt::format("line {}: {}", line, msg));
}

double to_double(const std::string& t, int line) {
    std::string s = trim(t);
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        bad(line, fmt::format("expected a number, got '{}'", s));
    }
    if (used != s.size()) bad(line, fmt::format("expected a number, got '{}'", s));
    return v;
}

std::vector<double> number_list(const std::string& t, int line) {
    std::string s = t;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(to_double(tok, line));
    return out;
}

std::string num(double v) { return fmt::format("{}", v); }

}  // namespace

WaveFunctionModel Scenario::model() const {
    WaveFunctionModel m;
    for (const auto& c : components) {
        try {
            m.components.emplace_back(c.id, parse_expression(c.expr), c.kind);
        } catch (const Error& e) {
            throw Error(e.kind(), fmt::format("component '{}': {}", c.id, e.what()));
        }
    }
    for (size_t k = 0; k < terms.size(); ++k) {
        Term t;
        try {
            t.amplitude = parse_expression(terms[k].amplitude);
        } catch (const Error& e) {
            throw Error(e.kind(), fmt::format("term {}: {}", k + 1, e.what()));
        }
        t.factors = terms[k].factors;
        m.terms.push_back(std::move(t));
    }
    m.validate();
    return m;
}

Scenario load_scenario(std::istream& is) {
    Scenario s;
    std::string section;
    std::string raw;
    int line = 0;
    bool have_dir = false;
    while (std::getline(is, raw)) {
        ++line;
        std::string l = trim(raw.substr(0, raw.find('#')));
        if (l.empty()) continue;
        if (l.front() == '[') {
            if (l.back() != ']') bad(line, "unterminated section header");
            section = trim(l.substr(1, l.size() - 2));
            if (section != "scenario" && section != "components" && section != "terms" && section != "r" && section != "kappa")
                bad(line, fmt::format("unknown section [{}]", section));
            continue;
        }
        if (section == "r" || section == "kappa") {
            auto v = number_list(l, line);
            auto& dst = section == "r" ? s.r_values : s.kappas;
            dst.insert(dst.end(), v.begin(), v.end());
            continue;
        }
        size_t eq = l.find('=');
        if (eq == std::string::npos) bad(line, "expected 'key = value'");
        std::string key = trim(l.substr(0, eq)), val = trim(l.substr(eq + 1));
        if (section == "components") {
            ComponentSpec c;
            c.id = key;
            size_t semi = val.find(';');
            c.expr = trim(val.substr(0, semi));
            if (semi != std::string::npos) {
                std::string kind = trim(val.substr(semi + 1));
                if (kind == "pole") c.kind = ComponentKind::Pole;
                else if (kind == "branch") c.kind = ComponentKind::Branch;
                else bad(line, fmt::format("unknown component kind '{}'", kind));
            }
            if (c.expr.empty()) bad(line, "empty component expression");
            s.components.push_back(c);
        } else if (section == "terms") {
            if (key != "term") bad(line, "expected 'term = amplitude | id:mu ...'");
            TermSpec t;
            size_t bar = val.find('|');
            t.amplitude = trim(val.substr(0, bar));
            if (t.amplitude.empty()) bad(line, "empty amplitude");
            if (bar != std::string::npos) {
                std::istringstream fs(val.substr(bar + 1));
                std::string tok;
                while (fs >> tok) {
                    size_t colon = tok.find(':');
                    if (colon == std::string::npos) bad(line, fmt::format("factor '{}' is not id:mu", tok));
                    t.factors.push_back({tok.substr(0, colon), to_double(tok.substr(colon + 1), line)});
                }
            }
            s.terms.push_back(t);
        } else if (section == "scenario") {
            auto one = [&] { return to_double(val, line); };
            auto& p = s.surface;
            if (key == "name") s.name = val;
            else if (key == "direction") {
                auto v = number_list(val, line);
                if (v.size() != 2) bad(line, "direction needs two numbers");
                s.direction = {v[0], v[1]};
                have_dir = true;
            } else if (key == "window") {
                auto v = number_list(val, line);
                if (v.size() != 4) bad(line, "window needs x0, x1, y0, y1");
                s.window = {v[0], v[1], v[2], v[3]};
            } else if (key == "grid") s.grid = static_cast<int>(one());
            else if (key == "r_ref") s.r_ref = one();
            else if (key == "rho") p.rho = one();
            else if (key == "beta") p.beta = one();
            else if (key == "sos_beta") p.sos_beta = one();
            else if (key == "floor") p.floor = one();
            else if (key == "blend") p.blend = one();
            else if (key == "decay_floor") p.decay_floor = one();
            else if (key == "decay_gain") p.decay_gain = one();
            else if (key == "decay_power") p.decay_power = one();
            else if (key == "band") p.band = one();
            else if (key == "margin") p.margin = one();
            else if (key == "lift") p.lift = one();
            else if (key == "slope_limit") p.slope_limit = one();
            else if (key == "eta_max") p.eta_max = one();
            else if (key == "taper") p.taper = one();
            else if (key == "max_rel_first") s.max_rel_first = one();
            else if (key == "slope_min") s.slope_min = one();
            else if (key == "slope_max") s.slope_max = one();
            else bad(line, fmt::format("unknown key '{}'", key));
        } else {
            bad(line, "entry outside of a section");
        }
    }
    if (!have_dir) throw Error(ErrorKind::Scenario, "missing direction");
    double n = norm(s.direction);
    if (!(n > 0) || !std::isfinite(n)) throw Error(ErrorKind::Scenario, "direction must be nonzero");
    if (std::abs(n - 1.0) > 1e-15) s.direction = (1.0 / n) * s.direction;
    if (!(s.window.x1 > s.window.x0 && s.window.y1 > s.window.y0)) throw Error(ErrorKind::Scenario, "empty window");
    if (s.grid < 2 || s.grid % 2) throw Error(ErrorKind::Scenario, "grid must be an even number >= 2");
    for (double r : s.r_values)
        if (!(r > 0)) throw Error(ErrorKind::Scenario, "r values must be positive");
    for (double k : s.kappas)
        if (!(k > 0)) throw Error(ErrorKind::Scenario, "kappa values must be positive");
    if (s.components.empty()) throw Error(ErrorKind::Scenario, "no components");
    if (s.terms.empty()) throw Error(ErrorKind::Scenario, "no terms");
    s.model();
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", path));
    return load_scenario(in);
}

void save_scenario(std::ostream& os, const Scenario& s) {
    const auto& p = s.surface;
    os << "[scenario]\n";
    os << "name = " << s.name << "\n";
    os << "direction = " << num(s.direction.x) << ", " << num(s.direction.y) << "\n";
    os << "window = " << num(s.window.x0) << ", " << num(s.window.x1) << ", " << num(s.window.y0) << ", "
       << num(s.window.y1) << "\n";
    os << "grid = " << s.grid << "\n";
    os << "r_ref = " << num(s.r_ref) << "\n";
    os << "rho = " << num(p.rho) << "\n";
    os << "beta = " << num(p.beta) << "\n";
    os << "sos_beta = " << num(p.sos_beta) << "\n";
    os << "floor = " << num(p.floor) << "\n";
    os << "blend = " << num(p.blend) << "\n";
    os << "decay_floor = " << num(p.decay_floor) << "\n";
    os << "decay_gain = " << num(p.decay_gain) << "\n";
    os << "decay_power = " << num(p.decay_power) << "\n";
    os << "band = " << num(p.band) << "\n";
    os << "margin = " << num(p.margin) << "\n";
    os << "lift = " << num(p.lift) << "\n";
    os << "slope_limit = " << num(p.slope_limit) << "\n";
    os << "eta_max = " << num(p.eta_max) << "\n";
    os << "taper = " << num(p.taper) << "\n";
    os << "max_rel_first = " << num(s.max_rel_first) << "\n";
    os << "slope_min = " << num(s.slope_min) << "\n";
    os << "slope_max = " << num(s.slope_max) << "\n";
    os << "\n[components]\n";
    for (const auto& c : s.components)
        os << c.id << " = " << c.expr << " ; " << (c.kind == ComponentKind::Pole ? "pole" : "branch") << "\n";
    os << "\n[terms]\n";
    for (const auto& t : s.terms) {
        os << "term = " << t.amplitude << " |";
        for (const auto& f : t.factors) os << " " << f.component_id << ":" << num(f.mu);
        os << "\n";
    }
    os << "\n[r]\n";
    for (size_t k = 0; k < s.r_values.size(); ++k) os << (k ? ", " : "") << num(s.r_values[k]);
    if (!s.r_values.empty()) os << "\n";
    os << "\n[kappa]\n";
    for (size_t k = 0; k < s.kappas.size(); ++k) os << (k ? ", " : "") << num(s.kappas[k]);
    if (!s.kappas.empty()) os << "\n";
}

bool same_scenario(const Scenario& a, const Scenario& b) {
    std::ostringstream x, y;
    save_scenario(x, a);
    save_scenario(y, b);
    return x.str() == y.str();
}

std::vector<std::string> builtin_scenario_names() { return {"example_7_2", "example_7_5", "traces_only_circle"}; }

bool has_builtin_scenario(const std::string& name) {
    auto n = builtin_scenario_names();
    return std::find(n.begin(), n.end(), name) != n.end();
}

Scenario builtin_scenario(const std::string& name) {
    static const char* k72 = R"(
[scenario]
name = example_7_2
direction = 1.5, 0.9
window = -1.5, 2.5, -1.5, 2.5
grid = 400
[components]
s1 = xi1 + i*kappa ; branch
s2 = xi2 + i*kappa ; branch
s3 = xi1 + xi2 - 1 + i*kappa ; branch
[terms]
term = 1 | s1:0.5 s2:0.5 s3:0.5
[r]
2, 4, 8, 16
[kappa]
0.2
)";
    static const char* k75 = R"(
[scenario]
name = example_7_5
direction = 1, 2
window = -3, 2.5, -1.5, 3.5
grid = 400
[components]
s1 = xi2 - 2 + i*kappa ; branch
s2 = xi2 - xi1^2 + i*kappa ; branch
[terms]
term = 1 | s1:0.5 s2:0.5
[r]
2, 4, 8, 16
[kappa]
0.2
)";
    static const char* kcircle = R"(
[scenario]
name = traces_only_circle
direction = 1, 1
window = -2, 2, -2, 2
grid = 200
[components]
c = (1 + i*kappa)^2 - xi1^2 - xi2^2 ; pole
[terms]
term = 1 | c:1
)";
    const char* text = name == "example_7_2" ? k72 : name == "example_7_5" ? k75 : name == "traces_only_circle" ? kcircle : nullptr;
    if (!text) throw Error(ErrorKind::Scenario, fmt::format("no built-in scenario '{}'", name));
    std::istringstream is(text);
    return load_scenario(is);
}

ConvergenceReport convergence_report(const std::vector<double>& r, const std::vector<double>& d, double slope_min,
                                     double slope_max) {
    if (r.size() != d.size()) throw Error(ErrorKind::Precondition, "r and discrepancy lists differ in length");
    if (r.size() < 4) throw Error(ErrorKind::InsufficientData, "need at least 4 r values");
    auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    if (*hi < 4.0 * *lo) throw Error(ErrorKind::InsufficientData, "r values must span a factor of at least 4");
    const size_t n = r.size();
    double mx = 0, my = 0;
    std::vector<double> lx(n), ly(n);
    for (size_t k = 0; k < n; ++k) {
        if (!(r[k] > 0) || !(d[k] > 0)) throw Error(ErrorKind::InsufficientData, "r and discrepancies must be positive");
        lx[k] = std::log(r[k]);
        ly[k] = std::log(d[k]);
        mx += lx[k];
        my += ly[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (size_t k = 0; k < n; ++k) {
        sxx += (lx[k] - mx) * (lx[k] - mx);
        sxy += (lx[k] - mx) * (ly[k] - my);
    }
    ConvergenceReport rep;
    rep.slope = sxy / sxx;
    rep.intercept = my - rep.slope * mx;
    double ss = 0;
    for (size_t k = 0; k < n; ++k) {
        double e = ly[k] - (rep.intercept + rep.slope * lx[k]);
        ss += e * e;
    }
    rep.residual = std::sqrt(ss / n);
    rep.pass = rep.slope >= slope_min && rep.slope <= slope_max;
    return rep;
}

Analysis analyse(const Scenario& s) {
    Analysis a;
    a.model = s.model();
    double cell = std::max(s.window.x1 - s.window.x0, s.window.y1 - s.window.y0) / 400.0;
    for (const auto& c : a.model.components) a.traces.push_back(trace_real_curves(c, s.window, cell));
    a.bridges = determine_bridges(a.model, a.traces, s.window);
    a.points = classify_points(a.model, a.bridges, a.traces, s.direction, s.window);
    a.contributions = assemble_far_field(a.points);
    return a;
}

DeformationField build_field(const Scenario& s, const Analysis& a, int grid) {
    return build_global_field(a.model, a.bridges, s.direction, a.points, s.window, grid, grid, s.surface);
}

std::vector<ComparisonRow> compare(const Scenario& s, const Analysis& a, const DeformationField& f,
                                   const std::vector<double>& r_values, KernelKind kernel) {
    std::vector<ComparisonRow> rows;
    for (double r : r_values) {
        QuadConfig cfg;
        cfg.eps_scale = std::min(1.0, s.r_ref / r);
        cfg.kernel = kernel;
        Vec2 x = r * s.direction;
        QuadResult q = integrate_on_surface(a.model, a.bridges, f, x, cfg);
        rows.push_back({r, q.value, evaluate_far_field(a.contributions, x), q.error_estimate});
    }
    return rows;
}

void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows) {
    os << "r,re_numeric,im_numeric,re_asymptotic,im_asymptotic,abs_diff,rel_diff\n";
    for (const auto& r : rows)
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.r, r.numeric.real(),
                          r.numeric.imag(), r.asymptotic.real(), r.asymptotic.imag(), r.abs_diff(), r.rel_diff());
}

std::vector<ComparisonRow> read_comparison_csv(std::istream& is) {
    std::vector<ComparisonRow> rows;
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        if (n == 1 || trim(line).empty()) continue;
        auto v = number_list(line, n);
        if (v.size() < 5) bad(n, "comparison row needs at least 5 columns");
        rows.push_back({v[0], {v[1], v[2]}, {v[3], v[4]}, 0.0});
    }
    return rows;
}

}  // namespace farfield
