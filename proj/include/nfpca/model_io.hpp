#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "nfpca/bspline.hpp"
#include "nfpca/errors.hpp"
#include "nfpca/linear_fpca.hpp"
#include "nfpca/network.hpp"

namespace nfpca {

// On-disk model container: one JSON header line (version, kind, dims,
// activation, basis, array manifest, payload checksum) followed by the raw
// little-endian float64 payload in manifest order, row-major.
struct ModelFile {
    int version = 1;
    std::string kind;              // "network" | "fpca"
    NetworkDims dims;              // network only
    Activation activation = Activation::Tanh;
    int basis_count = 0;
    int basis_degree = 3;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, Eigen::MatrixXd>> arrays;
};

namespace detail {

inline std::uint64_t fnv1a64(const unsigned char* data, std::size_t len)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::vector<unsigned char> payload_bytes(const ModelFile& m)
{
    std::vector<unsigned char> bytes;
    for (const auto& [name, arr] : m.arrays) {
        (void)name;
        for (int i = 0; i < arr.rows(); ++i)
            for (int j = 0; j < arr.cols(); ++j) {
                unsigned char buf[sizeof(double)];
                const double v = arr(i, j);
                std::memcpy(buf, &v, sizeof(double));
                bytes.insert(bytes.end(), buf, buf + sizeof(double));
            }
    }
    return bytes;
}

} // namespace detail

inline void save_model(const std::string& path, const ModelFile& m)
{
    const auto payload = detail::payload_bytes(m);

    nlohmann::json header;
    header["format_version"] = m.version;
    header["kind"] = m.kind;
    header["dims"] = {{"L", m.dims.L}, {"J", m.dims.J}, {"K", m.dims.K}, {"R", m.dims.R}};
    header["activation"] = activation_name(m.activation);
    header["basis"] = {{"L", m.basis_count}, {"d", m.basis_degree}};
    header["seed"] = m.seed;
    header["rng"] = "mt19937_64+box-muller";
    nlohmann::json manifest = nlohmann::json::array();
    for (const auto& [name, arr] : m.arrays)
        manifest.push_back({{"name", name}, {"rows", arr.rows()}, {"cols", arr.cols()}});
    header["arrays"] = manifest;
    char checksum[32];
    std::snprintf(checksum, sizeof(checksum), "%016llx",
                  static_cast<unsigned long long>(
                      detail::fnv1a64(payload.data(), payload.size())));
    header["checksum"] = checksum;

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open '" + path + "' for writing");
    out << header.dump() << '\n';
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    if (!out)
        throw io_error("write failed for '" + path + "'");
}

inline ModelFile load_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open '" + path + "'");
    std::string header_line;
    if (!std::getline(in, header_line))
        throw io_error("'" + path + "': missing model header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_line);
    } catch (const std::exception& e) {
        throw io_error("'" + path + "': bad model header: " + e.what());
    }

    ModelFile m;
    m.version = header.at("format_version").get<int>();
    if (m.version != 1)
        throw io_error("'" + path + "': unsupported format version " +
                       std::to_string(m.version));
    m.kind = header.at("kind").get<std::string>();
    m.dims.L = header.at("dims").at("L").get<int>();
    m.dims.J = header.at("dims").at("J").get<int>();
    m.dims.K = header.at("dims").at("K").get<int>();
    m.dims.R = header.at("dims").at("R").get<int>();
    m.activation = activation_from_name(header.at("activation").get<std::string>());
    m.basis_count = header.at("basis").at("L").get<int>();
    m.basis_degree = header.at("basis").at("d").get<int>();
    m.seed = header.at("seed").get<std::uint64_t>();

    std::size_t total = 0;
    for (const auto& entry : header.at("arrays")) {
        const auto rows = entry.at("rows").get<int>();
        const auto cols = entry.at("cols").get<int>();
        m.arrays.emplace_back(entry.at("name").get<std::string>(),
                              Eigen::MatrixXd(rows, cols));
        total += static_cast<std::size_t>(rows) * cols;
    }

    std::vector<unsigned char> payload(total * sizeof(double));
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
    if (static_cast<std::size_t>(in.gcount()) != payload.size())
        throw io_error("'" + path + "': truncated payload");

    char checksum[32];
    std::snprintf(checksum, sizeof(checksum), "%016llx",
                  static_cast<unsigned long long>(
                      detail::fnv1a64(payload.data(), payload.size())));
    if (header.at("checksum").get<std::string>() != checksum)
        throw io_error("'" + path + "': checksum mismatch, file is corrupt");

    std::size_t off = 0;
    for (auto& [name, arr] : m.arrays) {
        (void)name;
        for (int i = 0; i < arr.rows(); ++i)
            for (int j = 0; j < arr.cols(); ++j) {
                double v = 0.0;
                std::memcpy(&v, payload.data() + off, sizeof(double));
                arr(i, j) = v;
                off += sizeof(double);
            }
    }
    return m;
}

inline ModelFile to_model_file(const NetworkParams& p, const BSplineBasis& basis,
                               std::uint64_t seed)
{
    ModelFile m;
    m.kind = "network";
    m.dims = p.dims;
    m.activation = p.activation;
    m.basis_count = basis.count();
    m.basis_degree = basis.degree();
    m.seed = seed;
    const auto names = p.array_names();
    const auto arrays = p.arrays();
    for (std::size_t i = 0; i < names.size(); ++i)
        m.arrays.emplace_back(names[i], *arrays[i]);
    return m;
}

inline NetworkParams network_from_model_file(const ModelFile& m)
{
    if (m.kind != "network")
        throw invalid_input("model file holds a '" + m.kind + "' model, not a network");
    NetworkParams p = zeros_like_params(m.dims, m.activation);
    const auto names = p.array_names();
    auto arrays = p.arrays();
    if (m.arrays.size() != names.size())
        throw io_error("network model file: wrong array count");
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (m.arrays[i].first != names[i])
            throw io_error("network model file: unexpected array '" +
                           m.arrays[i].first + "'");
        if (m.arrays[i].second.rows() != arrays[i]->rows() ||
            m.arrays[i].second.cols() != arrays[i]->cols())
            throw io_error("network model file: shape mismatch for '" + names[i] + "'");
        *arrays[i] = m.arrays[i].second;
    }
    return p;
}

inline ModelFile to_model_file(const FpcaModel& model, std::uint64_t seed)
{
    ModelFile m;
    m.kind = "fpca";
    m.dims = NetworkDims{model.basis.count(), 0, model.k(), 0};
    m.basis_count = model.basis.count();
    m.basis_degree = model.basis.degree();
    m.seed = seed;
    m.arrays.emplace_back("mean", Eigen::MatrixXd(model.mean));
    m.arrays.emplace_back("components", model.components);
    m.arrays.emplace_back("eigenvalues", Eigen::MatrixXd(model.eigenvalues));
    return m;
}

inline FpcaModel fpca_from_model_file(const ModelFile& m)
{
    if (m.kind != "fpca")
        throw invalid_input("model file holds a '" + m.kind + "' model, not fpca");
    if (m.arrays.size() != 3 || m.arrays[0].first != "mean" ||
        m.arrays[1].first != "components" || m.arrays[2].first != "eigenvalues")
        throw io_error("fpca model file: unexpected array manifest");
    BSplineBasis basis(m.basis_count, m.basis_degree);
    FpcaModel model{basis, gram_matrix(basis), m.arrays[0].second.row(0),
                    m.arrays[1].second, m.arrays[2].second.col(0)};
    return model;
}

} // namespace nfpca
