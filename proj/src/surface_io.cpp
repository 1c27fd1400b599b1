#include "esa/surface_io.hpp"

#include "esa/errors.hpp"

#include "json.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace esa {
namespace {

constexpr std::array<char, 8> kMagic{'E', 'S', 'A', 'S', 'U', 'R', 'F', '1'};

static_assert(std::endian::native == std::endian::little,
              "binary surface I/O assumes a little-endian host");

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ifstream in(path, mode);
    if (!in) throw InputError("cannot open surface file '" + path.string() + "'");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    return out;
}

int read_dim(const nlohmann::json& doc, const char* key, const std::filesystem::path& path) {
    const auto it = doc.find(key);
    if (it == doc.end()) {
        throw ParseError(path.string() + ": missing field \"" + key + "\"");
    }
    if (!it->is_number_integer()) {
        throw ParseError(path.string() + ": field \"" + key + "\" must be an integer");
    }
    return it->get<int>();
}

Surface load_json(const std::filesystem::path& path) {
    auto in = open_input(path, std::ios::in);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": malformed JSON at byte " + std::to_string(e.byte) + ": " +
                         e.what());
    }
    if (!doc.is_object()) throw ParseError(path.string() + ": top level must be an object");

    const int n_u = read_dim(doc, "n_u", path);
    const int n_v = read_dim(doc, "n_v", path);
    SphericalGrid grid = make_grid(n_u, n_v);

    const auto it = doc.find("points");
    if (it == doc.end() || !it->is_array()) {
        throw ParseError(path.string() + ": field \"points\" must be an array");
    }
    const auto expected = static_cast<std::size_t>(3 * grid.size());
    if (it->size() != expected) {
        throw DimensionError(path.string() + ": field \"points\" has " + std::to_string(it->size()) +
                             " numbers, expected 3*n_u*n_v = " + std::to_string(expected));
    }
    VectorField pts(3, grid.size());
    for (std::size_t k = 0; k < expected; ++k) {
        const auto& v = (*it)[k];
        if (!v.is_number()) {
            throw ParseError(path.string() + ": field \"points\" entry " + std::to_string(k) +
                             " is not a number");
        }
        pts.data()[k] = v.get<double>();
    }
    return Surface(std::move(grid), std::move(pts));
}

Surface load_binary(const std::filesystem::path& path) {
    auto in = open_input(path, std::ios::in | std::ios::binary);
    std::array<char, 8> magic{};
    std::uint32_t dims[2]{};
    in.read(magic.data(), magic.size());
    in.read(reinterpret_cast<char*>(dims), sizeof dims);
    if (!in || magic != kMagic) throw ParseError(path.string() + ": bad binary surface header");
    SphericalGrid grid = make_grid(static_cast<int>(dims[0]), static_cast<int>(dims[1]));
    VectorField pts(3, grid.size());
    in.read(reinterpret_cast<char*>(pts.data()), static_cast<std::streamsize>(pts.size() * sizeof(double)));
    if (!in) {
        throw DimensionError(path.string() + ": payload shorter than 3*n_u*n_v doubles");
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw DimensionError(path.string() + ": trailing bytes after payload");
    }
    return Surface(std::move(grid), std::move(pts));
}

} // namespace

Surface load_surface(const std::filesystem::path& path) {
    auto in = open_input(path, std::ios::in | std::ios::binary);
    std::array<char, 8> head{};
    in.read(head.data(), head.size());
    const bool binary = in.gcount() == static_cast<std::streamsize>(head.size()) && head == kMagic;
    in.close();
    return binary ? load_binary(path) : load_json(path);
}

void save_surface(const Surface& f, const std::filesystem::path& path, SurfaceFormat format) {
    const auto& pts = f.points();
    if (format == SurfaceFormat::Binary) {
        auto out = open_output(path, std::ios::out | std::ios::binary | std::ios::trunc);
        const std::uint32_t dims[2]{static_cast<std::uint32_t>(f.grid().n_u()),
                                    static_cast<std::uint32_t>(f.grid().n_v())};
        out.write(kMagic.data(), kMagic.size());
        out.write(reinterpret_cast<const char*>(dims), sizeof dims);
        out.write(reinterpret_cast<const char*>(pts.data()),
                  static_cast<std::streamsize>(pts.size() * sizeof(double)));
        return;
    }
    nlohmann::json doc;
    doc["n_u"] = f.grid().n_u();
    doc["n_v"] = f.grid().n_v();
    doc["points"] = std::vector<double>(pts.data(), pts.data() + pts.size());
    auto out = open_output(path, std::ios::out | std::ios::trunc);
    out << doc.dump() << '\n';
}

int obj_triangle_count(const SphericalGrid& grid) {
    return 2 * grid.n_u() * (grid.n_v() - 1) + 2 * (grid.n_u() - 2);
}

void export_obj(const Surface& f, const std::filesystem::path& path) {
    const SphericalGrid& g = f.grid();
    auto out = open_output(path, std::ios::out | std::ios::trunc);
    out.precision(17);
    for (int k = 0; k < g.size(); ++k) {
        const auto p = f.point(k);
        out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    }
    // 1-based indices; winding follows the f_u x f_v normal.
    auto id = [&](int i, int j) { return g.node(i % g.n_u(), j) + 1; };
    for (int j = 0; j + 1 < g.n_v(); ++j) {
        for (int i = 0; i < g.n_u(); ++i) {
            out << "f " << id(i, j) << ' ' << id(i + 1, j) << ' ' << id(i + 1, j + 1) << '\n';
            out << "f " << id(i, j) << ' ' << id(i + 1, j + 1) << ' ' << id(i, j + 1) << '\n';
        }
    }
    const int last = g.n_v() - 1;
    for (int i = 1; i + 1 < g.n_u(); ++i) {
        out << "f " << id(0, 0) << ' ' << id(i + 1, 0) << ' ' << id(i, 0) << '\n';
    }
    for (int i = 1; i + 1 < g.n_u(); ++i) {
        out << "f " << id(0, last) << ' ' << id(i, last) << ' ' << id(i + 1, last) << '\n';
    }
}

void write_node_scalars_csv(const SphericalGrid& grid, std::span<const double> values,
                            const std::string& column, const std::filesystem::path& path) {
    if (values.size() != static_cast<std::size_t>(grid.size())) {
        throw DimensionError("scalar field has " + std::to_string(values.size()) + " values, grid has " +
                             std::to_string(grid.size()) + " nodes");
    }
    auto out = open_output(path, std::ios::out | std::ios::trunc);
    out.precision(17);
    out << "node,i_u,j_v,theta,phi," << column << '\n';
    for (int k = 0; k < grid.size(); ++k) {
        const int i = grid.column_of(k);
        const int j = grid.row_of(k);
        out << k << ',' << i << ',' << j << ',' << grid.theta(i) << ',' << grid.phi(j) << ',' << values[k]
            << '\n';
    }
}

} // namespace esa
