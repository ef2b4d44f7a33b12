#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "farfield/asym.hpp"
#include "farfield/quad.hpp"

namespace farfield {

struct ComponentSpec {
    std::string id;
    std::string expr;
    ComponentKind kind = ComponentKind::Branch;
};

struct TermSpec {
    std::string amplitude;
    std::vector<Factor> factors;
};

struct Scenario {
    std::string name = "scenario";
    std::vector<ComponentSpec> components;
    std::vector<TermSpec> terms;
    Vec2 direction{1.0, 0.0};  // normalized on load
    Window window;
    int grid = 400;
    std::vector<double> r_values;
    std::vector<double> kappas;
    double r_ref = 4.0;  // eta is scaled by min(1, r_ref/r) at observation distance r
    SurfaceParams surface;
    double max_rel_first = 0.15;
    double slope_min = -2.6;
    double slope_max = -1.4;

    WaveFunctionModel model() const;
};

Scenario load_scenario(std::istream& is);
Scenario load_scenario_file(const std::string& path);
void save_scenario(std::ostream& os, const Scenario& s);
bool same_scenario(const Scenario& a, const Scenario& b);

// Built-in scenarios: example_7_2, example_7_5, traces_only_circle.
bool has_builtin_scenario(const std::string& name);
Scenario builtin_scenario(const std::string& name);
std::vector<std::string> builtin_scenario_names();

struct ComparisonRow {
    double r = 0.0;
    cplx numeric;
    cplx asymptotic;
    double error_estimate = 0.0;

    double abs_diff() const { return std::abs(numeric - asymptotic); }
    double rel_diff() const { return abs_diff() / std::abs(numeric); }
};

struct ConvergenceReport {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS of the log-log fit
    bool pass = false;
};

ConvergenceReport convergence_report(const std::vector<double>& r, const std::vector<double>& discrepancy,
                                     double slope_min, double slope_max);

struct Analysis {
    WaveFunctionModel model;
    std::vector<RealTrace> traces;
    BridgeConfig bridges;
    std::vector<SpecialPoint> points;
    std::vector<Contribution> contributions;
};

Analysis analyse(const Scenario& s);
DeformationField build_field(const Scenario& s, const Analysis& a, int grid);
std::vector<ComparisonRow> compare(const Scenario& s, const Analysis& a, const DeformationField& f,
                                   const std::vector<double>& r_values, KernelKind kernel = KernelKind::Auto);

void write_comparison_csv(std::ostream& os, const std::vector<ComparisonRow>& rows);
std::vector<ComparisonRow> read_comparison_csv(std::istream& is);

}  // namespace farfield
