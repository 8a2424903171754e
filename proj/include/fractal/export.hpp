#pragma once

// Text encodings of scan orders: JSON, CSV (`index,row,col`) and an SVG
// polyline through the cell centres.

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "fractal/curves.hpp"
#include "fractal/error.hpp"

namespace fractal {

enum class ExportFormat { json, csv, svg };

inline ExportFormat parse_export_format(std::string_view name) {
  if (name == "json") return ExportFormat::json;
  if (name == "csv") return ExportFormat::csv;
  if (name == "svg") return ExportFormat::svg;
  throw Error(ErrorCode::ParseError, "unknown export format '" + std::string(name) + "'");
}

// Shortest round-trip decimal form of a double.
inline std::string format_number(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

inline nlohmann::ordered_json order_to_json(const ScanOrder& order) {
  const auto& spec = order.spec();
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["rows"] = spec.shape.rows;
  j["cols"] = spec.shape.cols;
  j["direction"] = spec.direction;
  j["shift"] = spec.shift;
  auto forward = nlohmann::ordered_json::array();
  for (const auto cell : order.forward()) forward.push_back({cell.row, cell.col});
  j["forward"] = std::move(forward);
  return j;
}

inline ScanOrder order_from_json(const nlohmann::json& j) {
  try {
    CurveSpec spec;
    spec.kind = parse_curve_kind(j.at("kind").get<std::string>());
    spec.shape = {j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>()};
    spec.direction = j.value("direction", 1);
    spec.shift = j.value("shift", 0);
    spec.validate();
    std::vector<CellCoord> forward;
    for (const auto& pair : j.at("forward")) {
      if (!pair.is_array() || pair.size() != 2) {
        throw Error(ErrorCode::ParseError, "forward entries must be [row, col] pairs");
      }
      forward.push_back({pair[0].get<std::int64_t>(), pair[1].get<std::int64_t>()});
    }
    return ScanOrder(spec, std::move(forward));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

inline std::string order_to_csv(const ScanOrder& order) {
  std::string out = "index,row,col\n";
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto cell = order[i];
    out += std::to_string(i);
    out += ',';
    out += std::to_string(cell.row);
    out += ',';
    out += std::to_string(cell.col);
    out += '\n';
  }
  return out;
}

inline std::string order_to_svg(const ScanOrder& order) {
  const auto shape = order.shape();
  const auto cols = std::to_string(shape.cols);
  const auto rows = std::to_string(shape.rows);
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + cols + " " + rows +
         "\" width=\"" + std::to_string(shape.cols * 32) + "\" height=\"" +
         std::to_string(shape.rows * 32) + "\">\n";
  out += "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"0.1\" "
         "stroke-linejoin=\"round\" points=\"";
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto cell = order[i];
    if (i) out += ' ';
    out += format_number(static_cast<double>(cell.col) + 0.5);
    out += ',';
    out += format_number(static_cast<double>(cell.row) + 0.5);
  }
  out += "\"/>\n</svg>\n";
  return out;
}

inline std::string export_order(const ScanOrder& order, ExportFormat format) {
  switch (format) {
    case ExportFormat::json: return order_to_json(order).dump() + "\n";
    case ExportFormat::csv: return order_to_csv(order);
    case ExportFormat::svg: return order_to_svg(order);
  }
  return {};
}

}  // namespace fractal
