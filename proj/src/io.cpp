#include "piheat/io.hpp"

#include <cstdio>

namespace piheat {

namespace {

const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        throw invalid_input_error(std::string("missing field '") + key + "'");
    return j.at(key);
}

long long as_int(const json& j, const char* what) {
    if (!j.is_number_integer())
        throw invalid_input_error(std::string(what) + " must be an integer");
    return j.get<long long>();
}

} // namespace

Rational parse_rational_field(const json& j) {
    try {
        if (j.is_number_integer()) return Rational(j.get<long long>());
        if (j.is_string()) return parse_rational(j.get<std::string>());
        if (j.is_number_float()) {
            // binary floats are exact rationals
            return Rational(j.get<double>());
        }
    } catch (const std::exception& e) {
        throw invalid_input_error(std::string("bad rational: ") + e.what());
    }
    throw invalid_input_error("expected an integer or a \"num/den\" string");
}

FieldParams parse_field(const json& j) {
    FieldParams fp;
    const json& p = require(j, "p");
    Rational pr = parse_rational_field(p);
    if (denominator(pr) != 1 || pr < 2)
        throw invalid_input_error("p must be an integer >= 2");
    fp.p = numerator(pr);
    fp.e = j.contains("e") ? as_int(j.at("e"), "e") : 1;
    fp.f = j.contains("f") ? as_int(j.at("f"), "f") : 1;
    fp.validate();
    return fp;
}

Ball parse_ball(const json& j) {
    Ball b;
    b.center = parse_rational_field(require(j, "center"));
    b.radius_exp = as_int(require(j, "radius_exp"), "radius_exp");
    return b;
}

HoledDisc parse_holed_disc(const json& j) {
    HoledDisc d;
    d.outer = parse_ball(require(j, "outer"));
    if (j.contains("holes"))
        for (const json& h : j.at("holes")) d.holes.push_back(parse_ball(h));
    return d;
}

AbstractCovering parse_abstract(const json& j, const FieldParams& fp) {
    AbstractCovering a;
    a.params = fp;
    for (const json& l : require(j, "labels"))
        a.labels.push_back(l.get<std::string>());
    for (const json& m : require(j, "measures"))
        a.measures.push_back(parse_rational_field(m));
    const json& d = require(j, "dist_exp");
    std::size_t n = a.labels.size();
    if (d.size() != n) throw invalid_input_error("dist_exp shape mismatch");
    a.dist.assign(n, std::vector<ValExp>(n, ValExp::infinity()));
    for (std::size_t i = 0; i < n; ++i) {
        if (d.at(i).size() != n)
            throw invalid_input_error("dist_exp shape mismatch");
        for (std::size_t k = 0; k < n; ++k)
            if (i != k)
                a.dist[i][k] =
                    ValExp::finite(as_int(d.at(i).at(k), "dist_exp"));
    }
    a.validate();
    return a;
}

CompiledCovering parse_covering(const json& j) {
    if (j.contains("abstract")) {
        FieldParams fp = parse_field(require(j, "field"));
        CompiledCovering cc;
        cc.abstract = parse_abstract(j.at("abstract"), fp);
        cc.geometry.params = fp;
        return cc;
    }
    FieldParams fp = parse_field(require(j, "field"));
    if (j.contains("holed_disc")) {
        HoledDisc X = parse_holed_disc(j.at("holed_disc"));
        return compile(verticial_cover(build_reduction_tree(X, fp)));
    }
    if (j.contains("members")) {
        GeometricCovering g;
        g.params = fp;
        for (const json& m : j.at("members"))
            g.members.push_back(parse_holed_disc(m));
        return compile(g);
    }
    throw invalid_input_error(
        "covering needs one of 'holed_disc', 'members', 'abstract'");
}

UMatrix parse_adjacency(const json& j) {
    UMatrix A;
    if (!j.is_array()) throw invalid_input_error("adjacency must be a matrix");
    for (const json& row : j) {
        std::vector<Rational> r;
        for (const json& x : row) r.push_back(parse_rational_field(x));
        A.a.push_back(std::move(r));
    }
    return A;
}

Mobius parse_mobius(const json& j) {
    if (!j.is_array() || j.size() != 2 || j.at(0).size() != 2 ||
        j.at(1).size() != 2)
        throw invalid_input_error("a transformation is a 2x2 matrix");
    Mobius g{parse_rational_field(j.at(0).at(0)),
             parse_rational_field(j.at(0).at(1)),
             parse_rational_field(j.at(1).at(0)),
             parse_rational_field(j.at(1).at(1))};
    g.validate();
    return g;
}

SchottkyData parse_schottky(const json& j) {
    long long cutoff =
        j.contains("cutoff") ? as_int(j.at("cutoff"), "cutoff") : 20;
    if (j.contains("tate")) {
        const json& t = j.at("tate");
        FieldParams fp = parse_field(t);
        return make_tate(fp, as_int(require(t, "n"), "n"), cutoff);
    }
    SchottkyData d;
    d.cover = parse_covering(require(j, "fundamental_cover"));
    d.params = d.cover.abstract.params;
    for (const json& g : require(j, "generators"))
        d.generators.push_back(parse_mobius(g));
    d.graph = parse_adjacency(require(j, "graph"));
    d.cutoff = cutoff;
    d.validate();
    return d;
}

void Table::add_row(std::vector<std::string> row) {
    if (row.size() != header.size())
        throw invalid_input_error("table row width mismatch");
    rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

std::string Table::to_json() const {
    json arr = json::array();
    for (const auto& row : rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < header.size(); ++i)
            obj[header[i]] = row[i];
        arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

} // namespace piheat
