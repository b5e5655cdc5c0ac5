#include "slatesim/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <system_error>

#include "slatesim/error.hpp"

namespace slatesim {

namespace {

double round_significant(double x, int digits) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, digits);
  double out = x;
  std::from_chars(buf, res.ptr, out);
  return out;
}

std::string shortest(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string row_label(std::size_t row) { return "catalog row " + std::to_string(row); }

}  // namespace

ItemCatalog::ItemCatalog(std::vector<Item> items) : items_(std::move(items)) {
  const std::size_t n = items_.size();
  position_.assign(n, n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const Item& it = items_[pos];
    if (it.id < 0 || static_cast<std::size_t>(it.id) >= n) {
      throw DomainError(row_label(pos + 1) + ": item_id " + std::to_string(it.id) +
                        " outside 0.." + std::to_string(n - 1));
    }
    if (position_[static_cast<std::size_t>(it.id)] != n) {
      throw DomainError(row_label(pos + 1) + ": duplicate item_id " + std::to_string(it.id));
    }
    if (!(it.sigma >= 0.0 && it.sigma <= 1.0)) {
      throw DomainError(row_label(pos + 1) + ": sigma outside [0, 1]");
    }
    if (!(std::isfinite(it.cost) && it.cost > 0.0)) {
      throw DomainError(row_label(pos + 1) + ": cost must be finite and > 0");
    }
    position_[static_cast<std::size_t>(it.id)] = pos;
  }

  by_ratio_.resize(n);
  std::iota(by_ratio_.begin(), by_ratio_.end(), 0);
  std::sort(by_ratio_.begin(), by_ratio_.end(), [this](ItemId a, ItemId b) {
    const double ra = sigma(a) / cost(a);
    const double rb = sigma(b) / cost(b);
    if (ra != rb) return ra > rb;
    return a < b;
  });

  by_cost_.resize(n);
  std::iota(by_cost_.begin(), by_cost_.end(), 0);
  std::sort(by_cost_.begin(), by_cost_.end(), [this](ItemId a, ItemId b) {
    if (cost(a) != cost(b)) return cost(a) < cost(b);
    return a < b;
  });
  sorted_costs_.resize(n);
  for (std::size_t i = 0; i < n; ++i) sorted_costs_[i] = cost(by_cost_[i]);
}

std::size_t ItemCatalog::affordable_count(double budget) const {
  return static_cast<std::size_t>(
      std::upper_bound(sorted_costs_.begin(), sorted_costs_.end(), budget) -
      sorted_costs_.begin());
}

ItemCatalog ItemCatalog::with_costs(std::span<const double> costs_by_id) const {
  if (costs_by_id.size() != items_.size()) {
    throw ContractViolation("with_costs: cost vector length does not match catalog size");
  }
  std::vector<Item> items = items_;
  for (auto& it : items) it.cost = costs_by_id[static_cast<std::size_t>(it.id)];
  return ItemCatalog(std::move(items));
}

void validate(const CostDistribution& dist) {
  if (!(std::isfinite(dist.low) && std::isfinite(dist.high) && dist.low >= 0.0 &&
        dist.low < dist.high)) {
    throw ConfigError("cost distribution requires finite 0 <= low < high");
  }
}

void validate(const BudgetDistribution& dist) {
  if (!(std::isfinite(dist.loc) && dist.loc > 0.0)) {
    throw ConfigError("budget distribution requires loc > 0");
  }
  if (!(std::isfinite(dist.scale) && dist.scale >= 0.0)) {
    throw ConfigError("budget distribution requires scale >= 0");
  }
}

std::vector<double> sample_costs(std::size_t n, const CostDistribution& dist, RngStream& rng,
                                 double cost_floor) {
  validate(dist);
  if (!(cost_floor > 0.0)) throw ConfigError("cost_floor must be > 0");
  std::vector<double> costs(n);
  const double width = dist.high - dist.low;
  for (auto& c : costs) {
    // high - U[0,1) * width lies in (low, high].
    c = std::max(dist.high - rng.uniform() * width, cost_floor);
  }
  return costs;
}

double sample_initial_budget(const BudgetDistribution& dist, RngStream& rng) {
  validate(dist);
  const double z = rng.normal();
  if (dist.scale == 0.0) return dist.loc;
  return dist.loc * std::exp(dist.scale * z);
}

ItemCatalog generate_synthetic_catalog(std::size_t n, const RelevanceParams& relevance,
                                       const CostDistribution& cost_dist, RngStream& rng,
                                       double cost_floor) {
  if (n == 0) throw ConfigError("catalog size must be >= 1");
  if (!(relevance.alpha >= 0.0 && relevance.beta >= 0.0) ||
      (relevance.alpha == 0.0 && relevance.beta == 0.0)) {
    throw ConfigError("relevance Beta parameters must be >= 0 and not both zero");
  }
  RngStream sigma_rng = rng.split("sigma");
  RngStream cost_rng = rng.split("cost");

  std::vector<double> sigmas(n);
  if (relevance.beta == 0.0) {
    std::fill(sigmas.begin(), sigmas.end(), 1.0);
  } else if (relevance.alpha == 0.0) {
    std::fill(sigmas.begin(), sigmas.end(), 0.0);
  } else {
    std::gamma_distribution<double> ga(relevance.alpha, 1.0);
    std::gamma_distribution<double> gb(relevance.beta, 1.0);
    for (auto& s : sigmas) {
      const double x = ga(sigma_rng);
      const double y = gb(sigma_rng);
      s = (x + y) > 0.0 ? x / (x + y) : 0.5;
    }
  }
  const auto costs = sample_costs(n, cost_dist, cost_rng, cost_floor);

  std::vector<Item> items(n);
  for (std::size_t i = 0; i < n; ++i) {
    items[i] = Item{static_cast<ItemId>(i), std::clamp(round_significant(sigmas[i], 9), 0.0, 1.0),
                    std::max(round_significant(costs[i], 9), cost_floor)};
  }
  return ItemCatalog(std::move(items));
}

void save_catalog(const ItemCatalog& catalog, std::ostream& out) {
  out << "item_id,sigma,cost\n";
  for (const auto& it : catalog.items()) {
    out << it.id << ',' << shortest(it.sigma) << ',' << shortest(it.cost) << '\n';
  }
}

void save_catalog(const ItemCatalog& catalog, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write catalog file " + path.string());
  save_catalog(catalog, out);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  for (auto& f : fields) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

template <typename T>
T parse_field(const std::string& text, const std::string& what, std::size_t row) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ParseError(row_label(row) + ": cannot parse " + what + " '" + text + "'");
  }
  return value;
}

}  // namespace

ItemCatalog load_catalog(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("catalog: empty file, expected header");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);
  const auto header = split_csv_line(line);
  int col_id = -1, col_sigma = -1, col_cost = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "item_id") col_id = static_cast<int>(c);
    if (header[c] == "sigma") col_sigma = static_cast<int>(c);
    if (header[c] == "cost") col_cost = static_cast<int>(c);
  }
  if (col_id < 0 || col_sigma < 0 || col_cost < 0) {
    throw ParseError("catalog header must contain item_id,sigma,cost; got '" + line + "'");
  }

  std::vector<Item> items;
  std::vector<char> seen;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError(row_label(row) + ": expected " + std::to_string(header.size()) +
                       " columns, found " + std::to_string(fields.size()));
    }
    Item it;
    it.id = parse_field<ItemId>(fields[static_cast<std::size_t>(col_id)], "item_id", row);
    it.sigma = parse_field<double>(fields[static_cast<std::size_t>(col_sigma)], "sigma", row);
    it.cost = parse_field<double>(fields[static_cast<std::size_t>(col_cost)], "cost", row);
    if (!(it.sigma >= 0.0 && it.sigma <= 1.0)) {
      throw ParseError(row_label(row) + ": sigma " + fields[static_cast<std::size_t>(col_sigma)] +
                       " outside [0, 1]");
    }
    if (!(std::isfinite(it.cost) && it.cost > 0.0)) {
      throw ParseError(row_label(row) + ": cost " + fields[static_cast<std::size_t>(col_cost)] +
                       " must be finite and > 0");
    }
    if (it.id < 0) throw ParseError(row_label(row) + ": negative item_id");
    const auto idx = static_cast<std::size_t>(it.id);
    if (idx >= seen.size()) seen.resize(idx + 1, 0);
    if (seen[idx]) {
      throw ParseError(row_label(row) + ": duplicate item_id " + std::to_string(it.id));
    }
    seen[idx] = 1;
    items.push_back(it);
  }
  if (items.empty()) throw ParseError("catalog: no item rows");
  for (std::size_t id = 0; id < items.size(); ++id) {
    if (id >= seen.size() || !seen[id]) {
      throw ParseError("catalog: item ids must be contiguous from 0; id " + std::to_string(id) +
                       " is missing");
    }
  }
  return ItemCatalog(std::move(items));
}

ItemCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open catalog file " + path.string());
  return load_catalog(in);
}

}  // namespace slatesim
