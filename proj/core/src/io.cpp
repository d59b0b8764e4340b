#include "mlc/io.hpp"

#include <fstream>

namespace mlc {

nlohmann::json matrix_to_json(const Matrix& a) {
    const Index d = a.rows();
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (Index i = 0; i < d; ++i) {
        nlohmann::json rrow = nlohmann::json::array();
        nlohmann::json irow = nlohmann::json::array();
        for (Index j = 0; j < a.cols(); ++j) {
            rrow.push_back(a(i, j).real());
            irow.push_back(a(i, j).imag());
        }
        re.push_back(std::move(rrow));
        im.push_back(std::move(irow));
    }
    return nlohmann::json{{"dim", d}, {"re", std::move(re)}, {"im", std::move(im)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("re")) {
        throw ValidationError("matrix json: need an object with 'dim' and 're'");
    }
    const Index d = j.at("dim").get<Index>();
    if (d < 1) throw ValidationError("matrix json: dim must be >= 1");
    const auto& re = j.at("re");
    const bool has_im = j.contains("im");
    // Transfer-style matrices reuse the schema with re.cols() columns.
    if (!re.is_array() || re.size() != static_cast<size_t>(d)) {
        throw ValidationError("matrix json: 're' must be a dim-row array");
    }
    const Index cols = static_cast<Index>(re.at(0).size());
    Matrix a(d, cols);
    for (Index i = 0; i < d; ++i) {
        const auto& rrow = re.at(static_cast<size_t>(i));
        if (static_cast<Index>(rrow.size()) != cols) {
            throw ValidationError("matrix json: ragged 're' rows");
        }
        for (Index jj = 0; jj < cols; ++jj) {
            double imv = 0.0;
            if (has_im) imv = j.at("im").at(static_cast<size_t>(i)).at(static_cast<size_t>(jj)).get<double>();
            a(i, jj) = Complex(rrow.at(static_cast<size_t>(jj)).get<double>(), imv);
        }
    }
    check_finite(a, "matrix json");
    return a;
}

nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

void save_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

Matrix load_matrix(const std::filesystem::path& path) { return matrix_from_json(load_json(path)); }

void save_matrix(const std::filesystem::path& path, const Matrix& a) {
    save_json(path, matrix_to_json(a));
}

nlohmann::json witness_to_json(const Witness& w) {
    nlohmann::json j = matrix_to_json(w.matrix.mat());
    j["k"] = w.level_k;
    j["normalized"] = w.normalized;
    return j;
}

Witness witness_from_json(const nlohmann::json& j) {
    if (!j.contains("k")) throw ValidationError("witness json: missing 'k'");
    Witness w{j.at("k").get<int>(), HermitianMatrix(matrix_from_json(j)),
              j.value("normalized", false)};
    if (w.level_k < 1 || w.level_k >= w.matrix.dim()) {
        throw ValidationError("witness json: k out of range");
    }
    return w;
}

std::vector<Observation> observations_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ValidationError("observations json: expected a list");
    std::vector<Observation> obs;
    obs.reserve(j.size());
    for (const auto& o : j) {
        Observation ob{HermitianMatrix(matrix_from_json(o.at("observable"))),
                       o.at("value").get<double>(), o.value("err_lo", 0.0), o.value("err_hi", 0.0)};
        obs.push_back(std::move(ob));
    }
    return obs;
}

nlohmann::json observations_to_json(std::span<const Observation> obs) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& o : obs) {
        j.push_back({{"observable", matrix_to_json(o.observable.mat())},
                     {"value", o.value},
                     {"err_lo", o.err_lo},
                     {"err_hi", o.err_hi}});
    }
    return j;
}

}  // namespace mlc
