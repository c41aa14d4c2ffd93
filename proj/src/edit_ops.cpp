#include "editsql/edit_ops.hpp"

#include <algorithm>
#include <map>

#include "editsql/sql_lang.hpp"

namespace editsql {

std::size_t EditScript::copy_blocks() const {
  std::size_t n = 0;
  for (const auto& b : ops) n += b.kind == EditOpKind::COPY;
  return n;
}
std::size_t EditScript::insert_blocks() const {
  std::size_t n = 0;
  for (const auto& b : ops) n += b.kind == EditOpKind::INSERT;
  return n;
}
std::size_t EditScript::tokens_copied() const {
  std::size_t n = 0;
  for (const auto& b : ops)
    if (b.kind == EditOpKind::COPY) n += b.tokens.size();
  return n;
}
std::size_t EditScript::tokens_inserted() const {
  std::size_t n = 0;
  for (const auto& b : ops)
    if (b.kind == EditOpKind::INSERT) n += b.tokens.size();
  return n;
}

namespace {

using Toks = std::vector<SqlToken>;

void push_block(std::vector<EditBlock>& out, EditOpKind kind, Toks tokens) {
  if (tokens.empty()) return;
  if (!out.empty() && out.back().kind == kind) {
    out.back().tokens.insert(out.back().tokens.end(), tokens.begin(),
                             tokens.end());
  } else {
    out.push_back({kind, std::move(tokens)});
  }
}

}  // namespace

// COPY blocks cover a longest common subsequence of the two sequences, so
// the total copied-token count is symmetric in the arguments. Backtracking
// takes matches as early as possible in the source and emits deletions
// before insertions, which keeps the walk deterministic.
EditScript diff(const SqlTokenSeq& prev, const SqlTokenSeq& cur) {
  const Toks& a = prev.tokens;
  const Toks& b = cur.tokens;
  const std::size_t n = a.size(), m = b.size();
  // dp[i][j] = LCS length of a[i:], b[j:]
  std::vector<std::vector<std::size_t>> dp(n + 1,
                                           std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      dp[i][j] = a[i] == b[j] ? dp[i + 1][j + 1] + 1
                              : std::max(dp[i + 1][j], dp[i][j + 1]);
  EditScript s;
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j] && dp[i][j] == dp[i + 1][j + 1] + 1) {
      push_block(s.ops, EditOpKind::COPY, {a[i]});
      ++i;
      ++j;
    } else if (i < n && (j == m || dp[i + 1][j] >= dp[i][j + 1])) {
      push_block(s.ops, EditOpKind::DELETE, {a[i]});
      ++i;
    } else {
      push_block(s.ops, EditOpKind::INSERT, {b[j]});
      ++j;
    }
  }
  return s;
}

SqlTokenSeq apply(const EditScript& script, const SqlTokenSeq& prev) {
  SqlTokenSeq out;
  out.schema_ref = prev.schema_ref;
  std::size_t pos = 0;
  for (const auto& b : script.ops) {
    switch (b.kind) {
      case EditOpKind::COPY:
      case EditOpKind::DELETE:
        if (pos + b.tokens.size() > prev.tokens.size() ||
            !std::equal(b.tokens.begin(), b.tokens.end(),
                        prev.tokens.begin() + pos))
          throw Error("apply: script inconsistent with source sequence");
        pos += b.tokens.size();
        if (b.kind == EditOpKind::COPY)
          out.tokens.insert(out.tokens.end(), b.tokens.begin(), b.tokens.end());
        break;
      case EditOpKind::INSERT:
        out.tokens.insert(out.tokens.end(), b.tokens.begin(), b.tokens.end());
        break;
    }
  }
  if (pos != prev.tokens.size())
    throw Error("apply: script does not cover the source sequence");
  return out;
}

std::vector<TurnEditStats> turn_edit_stats(
    const std::vector<Interaction>& interactions) {
  // bucket index 0..3 for turns 1, 2, 3, 4+
  std::vector<TurnEditStats> buckets(4);
  for (int i = 0; i < 4; ++i) buckets[i].turn_index = i + 1;
  for (const auto& it : interactions) {
    for (std::size_t t = 0; t < it.turns.size(); ++t) {
      const auto& cur = it.turns[t].second;
      auto& bk = buckets[std::min<std::size_t>(t, 3)];
      bk.sample_count += 1;
      bk.avg_query_length += static_cast<double>(cur.size());
      if (t == 0) {
        bk.avg_insert_ops += cur.empty() ? 0.0 : 1.0;
        bk.avg_tokens_inserted += static_cast<double>(cur.size());
      } else {
        const EditScript s = diff(it.turns[t - 1].second, cur);
        bk.avg_copy_ops += static_cast<double>(s.copy_blocks());
        bk.avg_insert_ops += static_cast<double>(s.insert_blocks());
        bk.avg_tokens_copied += static_cast<double>(s.tokens_copied());
        bk.avg_tokens_inserted += static_cast<double>(s.tokens_inserted());
      }
    }
  }
  std::vector<TurnEditStats> out;
  for (auto& bk : buckets) {
    if (bk.sample_count == 0) continue;
    const double n = static_cast<double>(bk.sample_count);
    bk.avg_query_length /= n;
    bk.avg_copy_ops /= n;
    bk.avg_insert_ops /= n;
    bk.avg_tokens_copied /= n;
    bk.avg_tokens_inserted /= n;
    out.push_back(bk);
  }
  return out;
}

namespace {

bool is_kw(const SqlToken& t, const char* text) {
  return t.kind == SqlTokenKind::KEYWORD && t.text == text;
}

}  // namespace

std::vector<Segment> extract_segments(const SqlTokenSeq& seq) {
  try {
    (void)decompose(seq);
  } catch (const Error&) {
    return {};
  }
  const auto& toks = seq.tokens;
  std::vector<Segment> out;
  // clause starts at depth 0 (set-operation sides are scanned in one pass
  // since set-op keywords also close the running clause)
  int depth = 0;
  std::string cur_label;
  std::size_t cur_start = 0;
  auto flush = [&](std::size_t end) {
    if (cur_label.empty() || cur_start >= end) return;
    // WHERE splits into one segment per condition
    if (cur_label == "WHERE_CONDITION") {
      std::size_t start = cur_start + 1;  // skip the WHERE keyword
      int d = 0, between = 0;
      for (std::size_t i = start; i <= end; ++i) {
        const bool at_end = i == end;
        if (!at_end && is_kw(toks[i], "(")) { ++d; continue; }
        if (!at_end && is_kw(toks[i], ")")) { --d; continue; }
        if (!at_end && d == 0 && is_kw(toks[i], "BETWEEN")) ++between;
        bool split = at_end;
        if (!at_end && d == 0 && (is_kw(toks[i], "AND") || is_kw(toks[i], "OR"))) {
          if (is_kw(toks[i], "AND") && between > 0) {
            --between;
          } else {
            split = true;
          }
        }
        if (split) {
          if (start < i)
            out.push_back({"WHERE_CONDITION",
                           std::vector<SqlToken>(toks.begin() + start,
                                                 toks.begin() + i),
                           start});
          start = i + 1;
        }
      }
    } else {
      out.push_back({cur_label,
                     std::vector<SqlToken>(toks.begin() + cur_start,
                                           toks.begin() + end),
                     cur_start});
    }
    cur_label.clear();
  };
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (is_kw(toks[i], "(")) { ++depth; continue; }
    if (is_kw(toks[i], ")")) { --depth; continue; }
    if (depth != 0 || toks[i].kind != SqlTokenKind::KEYWORD) continue;
    const std::string& t = toks[i].text;
    std::string label;
    if (t == "SELECT") label = "SELECT";
    else if (t == "FROM") label = "FROM";
    else if (t == "WHERE") label = "WHERE_CONDITION";
    else if (t == "GROUP" && i + 1 < toks.size() && is_kw(toks[i + 1], "BY")) label = "GROUP_BY";
    else if (t == "ORDER" && i + 1 < toks.size() && is_kw(toks[i + 1], "BY")) label = "ORDER_BY";
    else if (t == "HAVING") label = "HAVING";
    else if (t == "LIMIT") label = "LIMIT";
    else if (t == "UNION" || t == "INTERSECT" || t == "EXCEPT") {
      flush(i);
      continue;
    } else {
      continue;
    }
    flush(i);
    cur_label = label;
    cur_start = i;
  }
  flush(toks.size());
  std::sort(out.begin(), out.end(),
            [](const Segment& a, const Segment& b) { return a.start < b.start; });
  return out;
}

}  // namespace editsql
