#include "phoneval/assignment.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <functional>
#include <limits>
#include <sstream>

#include "phoneval/error.hpp"
#include "phoneval/parallel.hpp"
#include "text_util.hpp"

namespace phoneval {

std::string_view to_string(AssignmentKind k) {
  return k == AssignmentKind::kManyToOne ? "many-to-one" : "one-to-one";
}

namespace {

struct SquareMatching {
  std::vector<int> col_to_row;
  std::vector<int> row_to_col;
};

// Hungarian method (shortest augmenting paths with potentials) on an n x n
// cost matrix. Returns the matching and leaves optimal duals in u, v so that
// cost(i,j) - u[i] - v[j] >= 0 with equality on every optimal edge.
SquareMatching hungarian_min(const CountMatrix& cost, std::vector<Count>& u,
                             std::vector<Count>& v) {
  const int n = static_cast<int>(cost.rows());
  constexpr Count kInf = std::numeric_limits<Count>::max() / 4;
  u.assign(n + 1, 0);
  v.assign(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);  // p[col] = row, 1-based
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<Count> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      Count delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Count cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  SquareMatching m{std::vector<int>(n), std::vector<int>(n)};
  for (int j = 1; j <= n; ++j) {
    m.col_to_row[j - 1] = p[j] - 1;
    m.row_to_col[p[j] - 1] = j - 1;
  }
  return m;
}

// Every optimal matching uses only tight edges of an optimal dual, and every
// perfect matching of tight edges is optimal. Walking columns in order and
// pinning each to its smallest feasible row yields the lexicographically
// smallest optimal col_to_row.
void lexmin_refine(const std::vector<std::vector<int>>& tight_rows,
                   SquareMatching& m) {
  const int n = static_cast<int>(m.col_to_row.size());
  std::vector<char> row_fixed(n, 0), col_fixed(n, 0);
  for (int j = 0; j < n; ++j) {
    for (int i : tight_rows[j]) {
      if (row_fixed[i]) continue;
      if (m.col_to_row[j] == i) break;
      // Re-route: j takes i. Column c (i's current partner) needs a new row,
      // and row r (j's current partner) is freed. Search c ~> r.
      const int r = m.col_to_row[j];
      const int c = m.row_to_col[i];
      std::vector<int> parent_col(n, -2);  // indexed by row
      std::deque<int> queue{c};
      std::vector<char> seen_col(n, 0);
      seen_col[c] = 1;
      seen_col[j] = 1;
      bool found = false;
      while (!queue.empty() && !found) {
        const int col = queue.front();
        queue.pop_front();
        for (int row : tight_rows[col]) {
          if (row_fixed[row] || row == i || parent_col[row] != -2) continue;
          parent_col[row] = col;
          if (row == r) {
            found = true;
            break;
          }
          const int next = m.row_to_col[row];
          if (col_fixed[next] || seen_col[next]) continue;
          seen_col[next] = 1;
          queue.push_back(next);
        }
      }
      if (!found) continue;
      // Flip the path back from r to c.
      int row = r;
      while (true) {
        const int col = parent_col[row];
        const int old_row = m.col_to_row[col];
        m.col_to_row[col] = row;
        m.row_to_col[row] = col;
        if (col == c) break;
        row = old_row;
      }
      m.col_to_row[j] = i;
      m.row_to_col[i] = j;
      break;
    }
    col_fixed[j] = 1;
    row_fixed[m.col_to_row[j]] = 1;
  }
}

}  // namespace

namespace {

// Units that could take a different target in some optimal matching: a
// non-matching tight edge lies on an alternating cycle iff its endpoints'
// columns share a strongly connected component.
int count_tie_columns(const std::vector<std::vector<int>>& tight_rows,
                      const SquareMatching& m, int real_cols, int real_rows) {
  const int n = static_cast<int>(m.col_to_row.size());
  std::vector<std::vector<int>> adj(n);
  for (int j = 0; j < n; ++j)
    for (int i : tight_rows[j])
      if (i != m.col_to_row[j]) adj[j].push_back(m.row_to_col[i]);

  // Tarjan, iterative.
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<char> on_stack(n, 0);
  int counter = 0, ncomp = 0;
  for (int s = 0; s < n; ++s) {
    if (index[s] != -1) continue;
    std::vector<std::pair<int, std::size_t>> call{{s, 0}};
    index[s] = low[s] = counter++;
    stack.push_back(s);
    on_stack[s] = 1;
    while (!call.empty()) {
      auto& [v, k] = call.back();
      if (k < adj[v].size()) {
        const int w = adj[v][k++];
        if (index[w] == -1) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = ncomp;
        } while (w != v);
        ++ncomp;
      }
      const int done = v;
      call.pop_back();
      if (!call.empty())
        low[call.back().first] = std::min(low[call.back().first], low[done]);
    }
  }

  int ties = 0;
  for (int j = 0; j < real_cols; ++j) {
    bool alt = false;
    for (int i : tight_rows[j])
      if (i != m.col_to_row[j] && i < real_rows &&
          comp[m.row_to_col[i]] == comp[j])
        alt = true;
    ties += alt;
  }
  return ties;
}

}  // namespace

AssignmentSolution solve_max_assignment(const CountMatrix& weights) {
  const int rows = static_cast<int>(weights.rows());
  const int cols = static_cast<int>(weights.cols());
  const int n = std::max(rows, cols);
  AssignmentSolution sol;
  if (n == 0) return sol;
  if ((weights.array() < 0).any())
    throw ValidationError("assignment weights must be non-negative");

  CountMatrix padded = CountMatrix::Zero(n, n);
  padded.topLeftCorner(rows, cols) = weights;
  const Count top = padded.maxCoeff();
  const CountMatrix cost = (CountMatrix::Constant(n, n, top) - padded).eval();

  std::vector<Count> u, v;
  SquareMatching m = hungarian_min(cost, u, v);

  // tight_rows[j]: rows with zero reduced cost on column j, ascending.
  std::vector<std::vector<int>> tight_rows(n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (cost(i, j) - u[i + 1] - v[j + 1] == 0) tight_rows[j].push_back(i);

  lexmin_refine(tight_rows, m);

  sol.col_to_row.assign(cols, -1);
  for (int j = 0; j < cols; ++j) {
    const int i = m.col_to_row[j];
    if (i < rows) {
      sol.col_to_row[j] = i;
      sol.value += weights(i, j);
    }
  }
  sol.tie_cols = count_tie_columns(tight_rows, m, cols, rows);
  return sol;
}

Assignment many_to_one(const ContingencyTable& table) {
  const auto& c = table.counts();
  const PhoneIndex silence = table.num_labels() - 1;
  Assignment a;
  a.kind = AssignmentKind::kManyToOne;
  a.map.assign(table.num_units(), silence);
  for (int j = 0; j < table.num_units(); ++j) {
    Count best = 0;
    int best_i = silence;
    int n_best = 0;
    for (int i = 0; i < table.num_labels(); ++i) {
      if (c(i, j) > best) {
        best = c(i, j);
        best_i = i;
        n_best = 1;
      } else if (c(i, j) == best && best > 0) {
        ++n_best;
      }
    }
    a.map[j] = best_i;
    a.objective_count += best;
    a.tie_units += n_best > 1;
  }
  a.objective = table.total() > 0 ? static_cast<double>(a.objective_count) /
                                        static_cast<double>(table.total())
                                  : 0.0;
  return a;
}

Assignment one_to_one(const ContingencyTable& table) {
  if (table.num_units() != table.num_labels())
    throw ValidationError(
        "one-to-one assignment needs |U| = |P|+1: table has " +
        std::to_string(table.num_units()) + " units for " +
        std::to_string(table.num_labels()) + " labels");
  // Rows are phones, columns units: col_to_row is exactly the unit map.
  auto sol = solve_max_assignment(table.counts());
  Assignment a;
  a.kind = AssignmentKind::kOneToOne;
  a.map = std::move(sol.col_to_row);
  a.objective_count = sol.value;
  a.objective = table.total() > 0 ? static_cast<double>(a.objective_count) /
                                        static_cast<double>(table.total())
                                  : 0.0;
  a.tie_units = sol.tie_cols;
  return a;
}

std::vector<PhoneIndex> map_units(const Assignment& a,
                                  std::span<const UnitId> units) {
  std::vector<PhoneIndex> out(units.size());
  for (std::size_t t = 0; t < units.size(); ++t) {
    const UnitId u = units[t];
    if (u < 0 || static_cast<std::size_t>(u) >= a.map.size() || a.map[u] < 0)
      throw ValidationError("unit id " + std::to_string(u) +
                            " is not covered by the assignment");
    out[t] = a.map[u];
  }
  return out;
}

AssignedCorpus map_units(const Assignment& a, const UnitCorpus& units,
                         int threads) {
  std::vector<const std::pair<const std::string, std::vector<UnitId>>*> items;
  for (const auto& kv : units.utterances) items.push_back(&kv);
  std::vector<std::vector<PhoneIndex>> streams(items.size());
  for_each_chunk(items.size(), threads,
                 [&](std::size_t, std::size_t b, std::size_t e) {
                   for (std::size_t k = b; k < e; ++k) {
                     try {
                       streams[k] = map_units(a, items[k]->second);
                     } catch (const ValidationError& err) {
                       throw ValidationError("utterance " + items[k]->first +
                                             ": " + err.what());
                     }
                   }
                 });
  AssignedCorpus out;
  for (std::size_t k = 0; k < items.size(); ++k)
    out.emplace(items[k]->first, std::move(streams[k]));
  return out;
}

std::string assignment_tsv(const Assignment& a, const PhonemeInventory& inv) {
  std::ostringstream out;
  char obj[64];
  std::snprintf(obj, sizeof obj, "%.17g", a.objective);
  out << "# kind: " << to_string(a.kind) << '\n'
      << "# objective: " << obj << '\n'
      << "# tie_units: " << a.tie_units << '\n';
  for (std::size_t j = 0; j < a.map.size(); ++j)
    out << j << '\t' << inv.symbol(a.map[j]) << '\n';
  return out.str();
}

Assignment parse_assignment_tsv(std::string_view text,
                                const PhonemeInventory& inv) {
  Assignment a;
  int line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    const auto where = "assignment:" + std::to_string(line_no);
    auto t = detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      auto body = detail::trim(t.substr(1));
      auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;
      auto key = detail::trim(body.substr(0, colon));
      auto value = detail::trim(body.substr(colon + 1));
      if (key == "kind")
        a.kind = value == "one-to-one" ? AssignmentKind::kOneToOne
                                       : AssignmentKind::kManyToOne;
      else if (key == "objective")
        a.objective = detail::parse_double(value, where);
      else if (key == "tie_units")
        a.tie_units = static_cast<int>(detail::parse_int(value, where));
      continue;
    }
    auto f = detail::split(t, '\t');
    if (f.size() != 2)
      throw ValidationError(where + ": expected 'unit_id\\tphone_symbol'");
    const long unit = detail::parse_int(f[0], where);
    if (unit != static_cast<long>(a.map.size()))
      throw ValidationError(where + ": unit ids must be listed in order");
    auto phone = inv.find(f[1]);
    if (!phone)
      throw ValidationError(where + ": unknown phone '" + std::string(f[1]) +
                            "'");
    a.map.push_back(*phone);
  }
  return a;
}

}  // namespace phoneval
