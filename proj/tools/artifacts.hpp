#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace frontlab::cli {

// Comma-separated, '.' decimal, one header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  std::vector<double> numbers(const std::string& name) const;
  std::vector<std::string> strings(const std::string& name) const;
};

// Shortest decimal text that reads back to the same double.
std::string num(double v);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);
nlohmann::ordered_json read_json(const std::filesystem::path& path);

}  // namespace frontlab::cli
