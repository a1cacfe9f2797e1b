#include "todalab/solution_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace todalab::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
    }
    fs::rename(tmp, path);
}

namespace {

json grid_to_json(const Grid2D& g) {
    json j;
    j["kind"] = g.is_disc() ? "disc" : "rectangle";
    if (g.is_disc()) j["radius"] = g.disc_radius();
    j["bounds"] = {g.xmin(), g.xmax(), g.ymin(), g.ymax()};
    j["h"] = g.h();
    j["x0"] = g.x0();
    j["y0"] = g.y0();
    j["nx"] = g.nx();
    j["ny"] = g.ny();
    return j;
}

Grid2D grid_from_json(const json& j) {
    auto b = j.at("bounds");
    Grid2D g = Grid2D::from_origin(b.at(0), b.at(1), b.at(2), b.at(3), j.at("h"), j.at("x0"),
                                   j.at("y0"), j.at("kind") == "disc",
                                   j.value("radius", 0.0));
    if (g.nx() != j.at("nx").get<int>() || g.ny() != j.at("ny").get<int>())
        throw std::runtime_error("solution meta: grid geometry does not reproduce");
    return g;
}

json weight_to_json(const toda::SystemWeight& w) {
    json j;
    switch (w.kind()) {
    case toda::SystemWeight::Kind::Differential: j["kind"] = "differential"; break;
    case toda::SystemWeight::Kind::MinusInfinity: j["kind"] = "minus_infinity"; break;
    case toda::SystemWeight::Kind::Field: j["kind"] = "field"; break;
    }
    j["rank"] = w.rank();
    if (w.differential()) {
        const auto& q = *w.differential();
        j["differential"]["leading"] = {q.leading().real(), q.leading().imag()};
        json zeros = json::array();
        for (const auto& z : q.zeros())
            zeros.push_back({z.position.real(), z.position.imag(), z.multiplicity});
        j["differential"]["zeros"] = zeros;
    }
    if (w.mollify_epsilon() > 0.0) j["mollify_epsilon"] = w.mollify_epsilon();
    return j;
}

weights::RDifferential differential_from_json(int rank, const json& j) {
    auto lead = j.at("leading");
    std::vector<weights::Zero> zeros;
    for (const auto& z : j.at("zeros"))
        zeros.push_back({{z.at(0).get<double>(), z.at(1).get<double>()}, z.at(2).get<int>()});
    return weights::RDifferential(rank, {lead.at(0).get<double>(), lead.at(1).get<double>()},
                                  std::move(zeros));
}

std::string field_csv(const Grid2D& g, const std::vector<double>& field) {
    std::ostringstream out;
    out << "nx,ny,h,x0,y0\n";
    out << g.nx() << ',' << g.ny() << ',' << format_double(g.h()) << ','
        << format_double(g.x0()) << ',' << format_double(g.y0()) << '\n';
    for (int j = 0; j < g.ny(); ++j) {
        for (int i = 0; i < g.nx(); ++i) {
            if (i) out << ',';
            double v = field[g.index(i, j)];
            out << (std::isnan(v) ? "nan" : format_double(v));
        }
        out << '\n';
    }
    return out.str();
}

std::vector<double> field_from_csv(const fs::path& path, const Grid2D& g) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing field file " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "nx,ny,h,x0,y0")
        throw std::runtime_error("corrupt field file (bad header): " + path.string());
    if (!std::getline(in, line)) throw std::runtime_error("corrupt field file: " + path.string());
    {
        std::istringstream hdr(line);
        std::string tok;
        std::getline(hdr, tok, ',');
        if (std::stoi(tok) != g.nx())
            throw std::runtime_error("field file disagrees with meta (nx): " + path.string());
        std::getline(hdr, tok, ',');
        if (std::stoi(tok) != g.ny())
            throw std::runtime_error("field file disagrees with meta (ny): " + path.string());
    }
    std::vector<double> field(g.node_count(), std::numeric_limits<double>::quiet_NaN());
    for (int j = 0; j < g.ny(); ++j) {
        if (!std::getline(in, line))
            throw std::runtime_error("corrupt field file (short): " + path.string());
        std::istringstream row(line);
        std::string tok;
        for (int i = 0; i < g.nx(); ++i) {
            if (!std::getline(row, tok, ','))
                throw std::runtime_error("corrupt field file (short row): " + path.string());
            field[g.index(i, j)] = (tok == "nan") ? std::numeric_limits<double>::quiet_NaN()
                                                  : std::stod(tok);
        }
    }
    return field;
}

std::string boundary_name(toda::BoundaryKind k) {
    switch (k) {
    case toda::BoundaryKind::FlatLike: return "flat_like";
    case toda::BoundaryKind::HyperbolicLike: return "hyperbolic_like";
    case toda::BoundaryKind::Custom: return "custom";
    }
    return "flat_like";
}

toda::BoundaryKind boundary_from_name(const std::string& s) {
    if (s == "flat_like") return toda::BoundaryKind::FlatLike;
    if (s == "hyperbolic_like") return toda::BoundaryKind::HyperbolicLike;
    if (s == "custom") return toda::BoundaryKind::Custom;
    throw std::runtime_error("unknown boundary kind: " + s);
}

} // namespace

void save_solution(const fs::path& dir, const toda::GridSolution& sol) {
    fs::create_directories(dir);
    json meta;
    meta["rank"] = sol.rank;
    meta["grid"] = grid_to_json(sol.grid);
    meta["weight"] = weight_to_json(sol.weight);
    meta["boundary"] = boundary_name(sol.boundary);
    if (!sol.custom_boundary.empty()) meta["custom_boundary"] = sol.custom_boundary;
    meta["solver"]["converged"] = sol.stats.converged;
    meta["solver"]["newton_iterations"] = sol.stats.newton_iterations;
    meta["solver"]["final_residual"] = sol.stats.final_residual;
    meta["solver"]["reality_violation"] = sol.stats.reality_violation;
    meta["solver"]["residual_history"] = sol.stats.residual_history;
    if (!sol.stats.message.empty()) meta["solver"]["message"] = sol.stats.message;
    write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");

    for (std::size_t f = 0; f < sol.u.size(); ++f) {
        write_file_atomic(dir / ("u_" + std::to_string(f + 1) + ".csv"),
                          field_csv(sol.grid, sol.u[f]));
    }
    if (sol.weight.kind() == toda::SystemWeight::Kind::Field) {
        write_file_atomic(dir / "phi.csv", field_csv(sol.grid, sol.weight.field_values()));
    }
}

toda::GridSolution load_solution(const fs::path& dir) {
    std::ifstream in(dir / "meta.json");
    if (!in) throw std::runtime_error("missing solution meta: " + (dir / "meta.json").string());
    json meta = json::parse(in);

    toda::GridSolution sol;
    sol.rank = meta.at("rank");
    sol.grid = grid_from_json(meta.at("grid"));
    const json& wj = meta.at("weight");
    std::string kind = wj.at("kind");
    if (kind == "differential") {
        sol.weight = toda::SystemWeight::from_differential(
            differential_from_json(sol.rank, wj.at("differential")));
    } else if (kind == "minus_infinity") {
        sol.weight = toda::SystemWeight::minus_infinity(sol.rank);
    } else if (kind == "field") {
        std::optional<weights::RDifferential> src;
        if (wj.contains("differential"))
            src = differential_from_json(sol.rank, wj.at("differential"));
        sol.weight = toda::SystemWeight::from_field(sol.rank, field_from_csv(dir / "phi.csv", sol.grid),
                                                    std::move(src), wj.value("mollify_epsilon", 0.0));
    } else {
        throw std::runtime_error("unknown weight kind in meta: " + kind);
    }
    sol.boundary = boundary_from_name(meta.at("boundary"));
    if (meta.contains("custom_boundary"))
        sol.custom_boundary = meta.at("custom_boundary").get<std::vector<double>>();

    for (int f = 0; f < sol.rank - 1; ++f)
        sol.u.push_back(field_from_csv(dir / ("u_" + std::to_string(f + 1) + ".csv"), sol.grid));

    const json& sv = meta.at("solver");
    sol.stats.converged = sv.at("converged");
    sol.stats.newton_iterations = sv.at("newton_iterations");
    sol.stats.final_residual = sv.at("final_residual");
    sol.stats.reality_violation = sv.at("reality_violation");
    sol.stats.residual_history = sv.at("residual_history").get<std::vector<double>>();
    if (sv.contains("message")) sol.stats.message = sv.at("message");
    return sol;
}

} // namespace todalab::io
