// Batch front-end: parse a JSON config, run one library operation, emit a
// CSV or JSON table. Exit codes: 0 success, 2 validation error, 3 numeric
// property failure, 4 unsupported mode.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "piheat/io.hpp"

using namespace piheat;

namespace {

struct Options {
    std::string input;
    std::string output;
    std::string format = "csv";
    long long depth = -1;     // override when >= 0
    long long cutoff = -1;    // override when >= 0
    std::uint64_t seed = 0;
    bool seed_set = false;
};

json load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input_error("cannot open input file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw invalid_input_error(std::string("bad JSON: ") + e.what());
    }
    return j;
}

void emit(const Table& t, const Options& opt) {
    std::string text = opt.format == "json" ? t.to_json() : t.to_csv();
    if (opt.output.empty() || opt.output == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(opt.output);
    if (!out)
        throw invalid_input_error("cannot open output file: " + opt.output);
    out << text;
}

std::string exact_or_empty(const Scalar& s) {
    return s.exact ? format_rational(*s.exact) : std::string();
}

struct HeatConfig {
    KernelSpec spec;
    CompiledCovering cover;
    long long depth = 0;
    double epsilon = 1.0;
    std::vector<double> times;
    json h0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

HeatConfig heat_config(const json& j, const Options& opt) {
    HeatConfig c;
    c.cover = parse_covering(j.at("covering"));
    c.spec = KernelSpec{c.cover.abstract, parse_adjacency(j.at("adjacency")),
                        j.contains("alpha")
                            ? parse_rational_field(j.at("alpha"))
                            : Rational(0)};
    c.spec.validate();
    c.depth = opt.depth >= 0 ? opt.depth
                             : j.value("depth", (long long)0);
    c.epsilon = j.value("epsilon", 1.0);
    if (j.contains("t")) {
        if (j.at("t").is_array())
            for (const json& t : j.at("t")) c.times.push_back(t.get<double>());
        else
            c.times.push_back(j.at("t").get<double>());
    }
    if (j.contains("h0")) c.h0 = j.at("h0");
    c.n_paths = j.value("n_paths", (std::size_t)0);
    c.seed = opt.seed_set ? opt.seed : j.value("seed", (std::uint64_t)0);
    return c;
}

/// Cells in member-major order from exact measures (works for abstract
/// coverings with no point geometry).
std::vector<std::size_t> cell_map(const AbstractCovering& cov,
                                  long long depth) {
    std::vector<std::size_t> map;
    for (std::size_t u = 0; u < cov.size(); ++u) {
        Rational n = cov.measures[u] * rat_pow(cov.params.p, depth * cov.params.f);
        if (denominator(n) != 1 || n < 1)
            throw refine_depth_error("depth too small for a member's measure");
        for (Integer i = 0; i < numerator(n); ++i) map.push_back(u);
    }
    return map;
}

int cmd_tree(const Options& opt) {
    json j = load(opt.input);
    FieldParams fp = parse_field(j.at("field"));
    HoledDisc X = parse_holed_disc(j.at("holed_disc"));
    ReductionTree t = build_reduction_tree(X, fp);
    Table out;
    out.header = {"vertex", "level", "center", "radius_exp", "parent",
                  "member_measure"};
    for (std::size_t i = 0; i < t.vertices.size(); ++i) {
        const TreeVertex& v = t.vertices[i];
        out.add_row({std::to_string(i), std::to_string(v.level),
                     format_rational(v.ball.center),
                     std::to_string(v.ball.radius_exp),
                     std::to_string(v.parent),
                     format_rational(v.member.measure(fp))});
    }
    emit(out, opt);
    return 0;
}

int cmd_spectrum(const Options& opt) {
    json j = load(opt.input);
    HeatConfig c = heat_config(j, opt);
    SpectrumReport rep = spectrum(c.spec, c.depth);
    Table out;
    out.header = {"kind", "label", "eigenvalue", "exact", "multiplicity"};
    for (std::size_t k = 0; k < rep.laplacian.size(); ++k)
        out.add_row({"laplacian", "e" + std::to_string(k),
                     format_double(rep.laplacian[k].lambda), "", "1"});
    for (const WaveletEigen& w : rep.wavelets)
        out.add_row({"wavelet", c.spec.cov.labels[w.member],
                     format_double(w.eigenvalue.approx),
                     exact_or_empty(w.eigenvalue),
                     w.multiplicity.str()});
    emit(out, opt);
    return 0;
}

int cmd_heat(const Options& opt) {
    json j = load(opt.input);
    HeatConfig c = heat_config(j, opt);
    HeatProblem p;
    p.spec = c.spec;
    p.epsilon = c.epsilon;
    p.times = c.times;
    p.depth = c.depth;
    p.cell_member = cell_map(c.spec.cov, c.depth);

    std::size_t start = 0;
    bool indicator = false;
    std::string kind = c.h0.value("kind", std::string("indicator"));
    if (kind == "indicator") {
        indicator = true;
        start = c.h0.value("member", (std::size_t)0);
        if (start >= c.spec.cov.size())
            throw invalid_input_error("h0 member out of range");
        double inv_mu =
            1.0 / c.spec.cov.measures[start].convert_to<double>();
        for (std::size_t i = 0; i < p.cell_member.size(); ++i)
            p.h0.push_back(p.cell_member[i] == start ? inv_mu : 0.0);
    } else if (kind == "cellwise") {
        for (const json& v : c.h0.at("values"))
            p.h0.push_back(v.get<double>());
    } else {
        throw invalid_input_error("h0 kind must be indicator or cellwise");
    }

    HeatSolution sol = solve(p);
    Table out;
    out.header = {"time", "label", "analytic_mass", "empirical_mass"};
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        StochasticityReport sr =
            stochasticity_check(p.spec, p.epsilon, sol.times[k]);
        if (!sr.pass) throw numeric_error("semigroup is not stochastic");
        std::vector<double> freq;
        if (c.n_paths > 0 && indicator)
            freq = simulate(p.spec, p.epsilon, sol.times[k], c.n_paths,
                            c.seed, start);
        for (std::size_t u = 0; u < p.spec.cov.size(); ++u) {
            double mu = p.spec.cov.measures[u].convert_to<double>();
            out.add_row(
                {format_double(sol.times[k]), p.spec.cov.labels[u],
                 format_double(sol.averages[k][Eigen::Index(u)] * mu),
                 freq.empty() ? std::string() : format_double(freq[u])});
        }
    }
    emit(out, opt);
    return 0;
}

int cmd_simulate(const Options& opt) {
    json j = load(opt.input);
    HeatConfig c = heat_config(j, opt);
    if (c.times.size() != 1)
        throw invalid_input_error("simulate needs exactly one time");
    std::size_t start = j.value("start_member", (std::size_t)0);
    if (c.n_paths < 1)
        throw invalid_input_error("simulate needs n_paths >= 1");
    std::vector<double> freq = simulate(c.spec, c.epsilon, c.times[0],
                                        c.n_paths, c.seed, start);
    Eigen::MatrixXd P = transition_matrix(c.spec, c.epsilon, c.times[0]);
    Table out;
    out.header = {"label", "empirical", "analytic"};
    for (std::size_t u = 0; u < c.spec.cov.size(); ++u)
        out.add_row({c.spec.cov.labels[u], format_double(freq[u]),
                     format_double(P(Eigen::Index(start), Eigen::Index(u)))});
    emit(out, opt);
    return 0;
}

struct TateOptions {
    long long p = 2, e = 1, f = 1, n = 2;
    std::string alpha = "1", s = "2";
};

int cmd_tate(const Options& opt, const TateOptions& t) {
    FieldParams fp{t.p, t.e, t.f};
    fp.validate();
    Rational alpha = parse_rational(t.alpha);
    Rational s = parse_rational(t.s);
    bool s_inf = s >= 64; // numerically indistinguishable from the limit
    Table out;
    out.header = {"label", "degree", "approx"};
    for (long long i = 0; i <= t.n; ++i) {
        Scalar d = tate_degree(fp, t.n, alpha, s, i, s_inf);
        out.add_row({"U_" + std::to_string(i), exact_or_empty(d),
                     format_double(d.approx)});
    }
    emit(out, opt);
    return 0;
}

struct ScanOptions {
    long long p = 2, e = 1, f = 1, from = 2, to = 12;
    std::string alpha = "1", s = "10";
};

int cmd_gap_scan(const Options& opt, const ScanOptions& sc) {
    FieldParams fp{sc.p, sc.e, sc.f};
    fp.validate();
    Table out;
    out.header = {"n", "gap", "kind", "min_measure"};
    for (const GapRow& r : gap_scan(fp, sc.from, sc.to,
                                    parse_rational(sc.alpha),
                                    parse_rational(sc.s)))
        out.add_row({std::to_string(r.n), format_double(r.gap), r.kind,
                     format_rational(r.min_measure)});
    emit(out, opt);
    return 0;
}

int cmd_invariant_spectrum(const Options& opt) {
    json j = load(opt.input);
    SchottkyData d = parse_schottky(j);
    if (opt.cutoff >= 0) d.cutoff = opt.cutoff;
    Rational alpha = j.contains("alpha")
                         ? parse_rational_field(j.at("alpha"))
                         : Rational(1);
    Rational s = j.contains("s") ? parse_rational_field(j.at("s"))
                                 : Rational(2);
    InvariantSpectrum sp = invariant_spectrum(d, alpha, s);
    Table out;
    out.header = {"kind", "label", "value", "exact", "tail_bound"};
    for (std::size_t k = 0; k < sp.graph_eigenvalues.size(); ++k)
        out.add_row({"laplacian", "e" + std::to_string(k),
                     format_double(sp.graph_eigenvalues[k]), "", ""});
    for (const InvariantDegree& w : sp.wavelet)
        out.add_row({"wavelet", d.cover.abstract.labels[w.member],
                     format_double(w.value.approx),
                     exact_or_empty(w.value),
                     format_double(w.tail_bound)});
    out.add_row({"gap", sp.gap_kind, format_double(sp.spectral_gap), "", ""});
    out.add_row({"residual", "", format_double(sp.generator_residual), "",
                 ""});
    emit(out, opt);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"heat operators and spectra on local fields"};
    app.require_subcommand(1);
    Options opt;
    TateOptions topt;
    ScanOptions sopt;

    auto add_io = [&](CLI::App* c, bool needs_input) {
        if (needs_input)
            c->add_option("-i,--input", opt.input, "JSON config path")
                ->required();
        c->add_option("-o,--output", opt.output, "output path (default stdout)");
        c->add_option("--format", opt.format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    CLI::App* tree = app.add_subcommand("tree", "reduction tree of a holed disc");
    add_io(tree, true);
    CLI::App* spectrum = app.add_subcommand("spectrum", "operator spectrum");
    add_io(spectrum, true);
    spectrum->add_option("--depth", opt.depth, "resolution depth override");
    CLI::App* heat = app.add_subcommand("heat", "Cauchy problem trajectory");
    add_io(heat, true);
    heat->add_option("--depth", opt.depth, "resolution depth override");
    heat->add_option("--seed", opt.seed, "RNG seed override")
        ->each([&](const std::string&) { opt.seed_set = true; });
    CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo jump process");
    add_io(simulate, true);
    simulate->add_option("--seed", opt.seed, "RNG seed override")
        ->each([&](const std::string&) { opt.seed_set = true; });
    CLI::App* tate = app.add_subcommand("tate", "genus-1 closed-form degrees");
    add_io(tate, false);
    tate->add_option("--p", topt.p);
    tate->add_option("--e", topt.e);
    tate->add_option("--f", topt.f);
    tate->add_option("--n", topt.n);
    tate->add_option("--alpha", topt.alpha);
    tate->add_option("--s", topt.s);
    CLI::App* scan = app.add_subcommand("gap-scan", "spectral gaps over the genus-1 family");
    add_io(scan, false);
    scan->add_option("--p", sopt.p);
    scan->add_option("--e", sopt.e);
    scan->add_option("--f", sopt.f);
    scan->add_option("--from", sopt.from);
    scan->add_option("--to", sopt.to);
    scan->add_option("--alpha", sopt.alpha);
    scan->add_option("--s", sopt.s);
    CLI::App* inv = app.add_subcommand("invariant-spectrum",
                                       "group-invariant spectrum");
    add_io(inv, true);
    inv->add_option("--cutoff", opt.cutoff, "word-length cutoff override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    bool verbose = std::getenv("PIHEAT_VERBOSE") != nullptr;
    try {
        if (tree->parsed()) return cmd_tree(opt);
        if (spectrum->parsed()) return cmd_spectrum(opt);
        if (heat->parsed()) return cmd_heat(opt);
        if (simulate->parsed()) return cmd_simulate(opt);
        if (tate->parsed()) return cmd_tate(opt, topt);
        if (scan->parsed()) return cmd_gap_scan(opt, sopt);
        if (inv->parsed()) return cmd_invariant_spectrum(opt);
    } catch (const unsupported_mode_error& e) {
        std::cerr << "unsupported mode: " << e.what() << "\n";
        return 4;
    } catch (const numeric_error& e) {
        std::cerr << "numeric property failure: " << e.what() << "\n";
        return 3;
    } catch (const error& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (verbose) std::cerr << "(unclassified exception)\n";
        return 2;
    }
    return 2;
}
