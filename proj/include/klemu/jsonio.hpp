#pragma once

#include <Eigen/Core>
#include <json.hpp>
#include <vector>

#include "klemu/codec.hpp"
#include "klemu/errors.hpp"

namespace klemu::jsonio {

/// Matrices travel as {rows, cols, data} with data = base64 of the
/// column-major IEEE-754 little-endian bytes — lossless round trip.
inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", codec::encode_doubles(m.data(), static_cast<std::size_t>(m.size()))}};
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = codec::decode_doubles(j.at("data").get<std::string>());
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw DataError("matrix payload: size mismatch");
  }
  Eigen::MatrixXd m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return {{"size", v.size()},
          {"data", codec::encode_doubles(v.data(), static_cast<std::size_t>(v.size()))}};
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto size = j.at("size").get<Eigen::Index>();
  const auto data = codec::decode_doubles(j.at("data").get<std::string>());
  if (size < 0 || static_cast<Eigen::Index>(data.size()) != size) {
    throw DataError("vector payload: size mismatch");
  }
  Eigen::VectorXd v(size);
  std::copy(data.begin(), data.end(), v.data());
  return v;
}

}  // namespace klemu::jsonio
