#include "esa/errors.hpp"
#include "esa/statistics.hpp"

#include "json.hpp"

#include <bit>
#include <fstream>
#include <string>

namespace esa {
namespace {

constexpr const char* kFormat = "esa-shape-model";
constexpr int kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "binary shape model I/O assumes a little-endian host");

void write_doubles(std::ostream& out, const double* data, Eigen::Index n) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::istream& in, double* data, Eigen::Index n, const std::filesystem::path& path,
                  const char* block) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw DimensionError(path.string() + ": payload too short while reading " + block);
}

} // namespace

void save_shape_model(const ShapeModel& model, const std::filesystem::path& path) {
    nlohmann::json header;
    header["format"] = kFormat;
    header["version"] = kVersion;
    header["n_u"] = model.mean.grid().n_u();
    header["n_v"] = model.mean.grid().n_v();
    header["rows"] = model.directions.rows();
    header["rank"] = model.rank();
    header["payload"] = "f64le: mean[rows], directions[rows*rank] column-major, singulars[rank]";

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << header.dump() << '\n';
    write_doubles(out, model.mean.points().data(), model.mean.points().size());
    write_doubles(out, model.directions.data(), model.directions.size());
    write_doubles(out, model.singulars.data(), model.singulars.size());
}

ShapeModel load_shape_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open shape model '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": missing header line");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": malformed header: " + e.what());
    }
    auto field = [&](const char* key) -> int {
        if (!header.contains(key) || !header[key].is_number_integer()) {
            throw ParseError(path.string() + ": header field \"" + key + "\" missing or not an integer");
        }
        return header[key].get<int>();
    };
    if (header.value("format", std::string()) != kFormat) {
        throw ParseError(path.string() + ": header field \"format\" is not " + kFormat);
    }
    if (field("version") != kVersion) throw ParseError(path.string() + ": unsupported version");

    SphericalGrid grid = make_grid(field("n_u"), field("n_v"));
    const int rows = field("rows");
    const int rank = field("rank");
    if (rows != 3 * grid.size() || rank < 0) {
        throw DimensionError(path.string() + ": header dimensions are inconsistent with the grid");
    }
    VectorField mean(3, grid.size());
    Eigen::MatrixXd directions(rows, rank);
    Eigen::VectorXd singulars(rank);
    read_doubles(in, mean.data(), mean.size(), path, "mean");
    read_doubles(in, directions.data(), directions.size(), path, "directions");
    read_doubles(in, singulars.data(), singulars.size(), path, "singulars");
    return {Surface(std::move(grid), std::move(mean)), std::move(directions), std::move(singulars)};
}

} // namespace esa
