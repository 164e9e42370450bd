#pragma once

// On-disk representation of protocol instances.
//
// An instance file is a JSON object:
//
//   {
//     "format_version": "wcf-1",
//     "dim": 2,
//     "rho":  [[[0.75, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.25, 0.0]]],
//     "e0":   ...
//   }
//
// Matrices are arrays of rows; every entry is a [real, imaginary] pair.
// Parsing is strict: anything structurally off throws parse_error with a
// message naming the offending field, and nothing is ever half-loaded.

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "wcf/protocol.hpp"

namespace wcf {

inline constexpr const char* format_version_tag = "wcf-1";
inline constexpr Eigen::Index max_document_dim = 256;

struct instance_document {
    std::string format_version = format_version_tag;
    Eigen::Index dim = 0;
    cmatrix rho;
    cmatrix e0;
};

inline nlohmann::json matrix_to_json(const cmatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back({m(i, j).real(), m(i, j).imag()});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline cmatrix matrix_from_json(const nlohmann::json& j, Eigen::Index dim, const char* name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
        throw parse_error(std::string(name) + " must be an array of " + std::to_string(dim) +
                          " rows");
    }
    cmatrix m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
        const nlohmann::json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
            throw parse_error(std::string(name) + " row " + std::to_string(r) + " must have " +
                              std::to_string(dim) + " entries");
        }
        for (Eigen::Index c = 0; c < dim; ++c) {
            const nlohmann::json& entry = row[static_cast<std::size_t>(c)];
            if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
                !entry[1].is_number()) {
                throw parse_error(std::string(name) + " entry (" + std::to_string(r) + ", " +
                                  std::to_string(c) + ") must be a [real, imaginary] pair");
            }
            m(r, c) = complex_t(entry[0].get<double>(), entry[1].get<double>());
        }
    }
    return m;
}

inline nlohmann::json to_json(const instance_document& doc) {
    return nlohmann::json{{"format_version", doc.format_version},
                          {"dim", doc.dim},
                          {"rho", matrix_to_json(doc.rho)},
                          {"e0", matrix_to_json(doc.e0)}};
}

inline instance_document instance_document_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw parse_error("instance document must be a JSON object");
    }
    for (const char* key : {"format_version", "dim", "rho", "e0"}) {
        if (!j.contains(key)) {
            throw parse_error(std::string("instance document is missing \"") + key + "\"");
        }
    }
    instance_document doc;
    if (!j["format_version"].is_string()) {
        throw parse_error("format_version must be a string");
    }
    doc.format_version = j["format_version"].get<std::string>();
    if (doc.format_version != format_version_tag) {
        throw parse_error("unsupported format version \"" + doc.format_version +
                          "\" (expected \"" + format_version_tag + "\")");
    }
    if (!j["dim"].is_number_integer()) {
        throw parse_error("dim must be an integer");
    }
    const auto dim = j["dim"].get<std::int64_t>();
    if (dim < 1 || dim > max_document_dim) {
        throw parse_error("dim must be between 1 and " + std::to_string(max_document_dim));
    }
    doc.dim = static_cast<Eigen::Index>(dim);
    doc.rho = matrix_from_json(j["rho"], doc.dim, "rho");
    doc.e0 = matrix_from_json(j["e0"], doc.dim, "e0");
    return doc;
}

inline instance_document load_instance_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw parse_error("cannot open \"" + path + "\" for reading");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buffer.str());
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("\"" + path + "\" is not valid JSON: " + e.what());
    }
    return instance_document_from_json(j);
}

inline void save_instance_document(const std::string& path, const instance_document& doc) {
    std::ofstream out(path);
    if (!out) {
        throw parse_error("cannot open \"" + path + "\" for writing");
    }
    out << to_json(doc).dump(2) << '\n';
    if (!out) {
        throw parse_error("failed while writing \"" + path + "\"");
    }
}

inline instance_document document_from_matrices(const cmatrix& rho, const cmatrix& e0) {
    if (rho.rows() != rho.cols() || e0.rows() != e0.cols() || rho.rows() != e0.rows()) {
        throw dimension_error("rho and e0 must be square matrices of the same dimension");
    }
    instance_document doc;
    doc.dim = rho.rows();
    doc.rho = rho;
    doc.e0 = e0;
    return doc;
}

inline protocol_instance instance_from_document(const instance_document& doc,
                                                const tolerances& t = {}) {
    return protocol_instance::build(hermitian_operator(doc.rho), hermitian_operator(doc.e0), t);
}

}  // namespace wcf
