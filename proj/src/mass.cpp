#include "toppler/mass.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>

namespace toppler {

template class BasicMassDist<double>;
template class BasicMassDist<Rational>;

ExactMassDist to_exact(const MassDist& d) {
  ExactMassDist e(d.table_ptr());
  d.for_each([&](VertexId v, double m) { e.set(v, Rational(m)); });
  return e;
}

namespace {

template <class A, class B, class Diff>
double discrepancy(const A& a, const B& b, Diff diff) {
  std::map<VertexKey, std::pair<double, double>> merged;
  a.for_each([&](VertexId v, const auto& m) { merged[a.table().key(v)].first = 0; (void)m; });
  b.for_each([&](VertexId v, const auto& m) { merged[b.table().key(v)].second = 0; (void)m; });
  double worst = 0;
  for (auto& [k, unused] : merged) worst = std::max(worst, diff(a.at(k), b.at(k)));
  return worst;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

double max_discrepancy(const MassDist& f, const ExactMassDist& e) {
  return discrepancy(f, e, [](double x, const Rational& y) {
    Rational diff = Rational(x) - y;
    return std::abs(diff.get_d());
  });
}

double max_discrepancy(const MassDist& a, const MassDist& b) {
  return discrepancy(a, b, [](double x, double y) { return std::abs(x - y); });
}

void write_csv(const MassDist& d, std::ostream& os) {
  std::vector<VertexId> ids = d.support();
  std::sort(ids.begin(), ids.end(), [&](VertexId a, VertexId b) { return d.table().key(a) < d.table().key(b); });
  os << "vertex_encoding,mass\n";
  char buf[64];
  for (auto v : ids) {
    std::snprintf(buf, sizeof buf, "%.17g", d.at(v));
    os << csv_field(d.table().graph().encode(d.table().key(v))) << ',' << buf << '\n';
  }
}

MassDist read_csv(GraphPtr g, std::istream& is) {
  auto table = std::make_shared<VertexTable>(g);
  MassDist d(table);
  std::string line;
  if (!std::getline(is, line) || line.rfind("vertex_encoding,mass", 0) != 0)
    throw StructuralError("distribution CSV must start with header vertex_encoding,mass");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::string field;
    std::size_t i = 0;
    if (line[0] == '"') {
      for (i = 1; i < line.size(); ++i) {
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            ++i;
          } else {
            ++i;
            break;
          }
        } else {
          field += line[i];
        }
      }
    } else {
      i = line.find(',');
      field = line.substr(0, i);
    }
    if (i >= line.size() || line[i] != ',') throw StructuralError("malformed CSV row: " + line);
    d.set(table->intern(g->decode(field)), std::stod(line.substr(i + 1)));
  }
  return d;
}

}  // namespace toppler
