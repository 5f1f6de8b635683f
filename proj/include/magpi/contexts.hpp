#pragma once

// Typing contexts: unrestricted (Gamma), linear (Delta), affine (Theta), and
// the Delta algebra of addition and splitting.

#include <algorithm>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "magpi/normalize.hpp"
#include "magpi/render.hpp"
#include "magpi/syntax.hpp"

namespace magpi {

struct GammaCtx {
  std::map<Role, ReplicatedType> replicated;
  std::map<std::string, BaseType> vars;
  bool operator==(const GammaCtx&) const = default;
};

// Linear context. Entries are kept normalized: parallel types are flat,
// sorted multisets.
struct DeltaCtx {
  std::map<Role, SessionType> entries;

  DeltaCtx() = default;
  DeltaCtx(std::initializer_list<std::pair<const Role, SessionType>> init) {
    for (const auto& [r, s] : init) entries.emplace(r, normalize(s));
  }
  bool empty() const { return entries.empty(); }
  bool operator==(const DeltaCtx&) const = default;
};

// Affine multiset of message types, kept sorted.
struct ThetaCtx {
  std::vector<MessageType> messages;

  ThetaCtx() = default;
  ThetaCtx(std::initializer_list<MessageType> init) {
    for (const auto& m : init) add(m);
  }
  void add(MessageType m) { messages.insert(std::upper_bound(messages.begin(), messages.end(), m), std::move(m)); }
  bool remove_one(const MessageType& m) {
    auto it = std::lower_bound(messages.begin(), messages.end(), m);
    if (it == messages.end() || *it != m) return false;
    messages.erase(it);
    return true;
  }
  bool empty() const { return messages.empty(); }
  std::size_t size() const { return messages.size(); }
  bool operator==(const ThetaCtx&) const = default;
};

struct ContextTriple {
  GammaCtx gamma;
  DeltaCtx delta;
  ThetaCtx theta;
};

inline std::string render(const DeltaCtx& d) {
  std::string out = "{";
  bool first = true;
  for (const auto& [r, s] : d.entries) {
    if (!first) out += ", ";
    first = false;
    out += r.value + ": " + render(s);
  }
  return out + "}";
}

inline std::string render(const ThetaCtx& t) {
  return "{" + detail::join(t.messages, ", ", [](const MessageType& m) { return render(m); }) + "}";
}

// Context addition: disjoint union, with overlapping roles composed in
// parallel.
inline DeltaCtx ctx_add(DeltaCtx a, const DeltaCtx& b) {
  for (const auto& [role, s] : b.entries) {
    auto it = a.entries.find(role);
    if (it == a.entries.end()) {
      a.entries.emplace(role, normalize(s));
    } else {
      it->second = normalize(SessionType{ParType{{std::move(it->second), s}}});
    }
  }
  return a;
}

inline DeltaCtx ctx_add(DeltaCtx a, const Role& role, SessionType s) {
  DeltaCtx single;
  single.entries.emplace(role, std::move(s));
  return ctx_add(std::move(a), single);
}

inline bool end_pred(const SessionType& s) {
  if (auto* p = std::get_if<ParType>(&s.node))
    return std::all_of(p->components.begin(), p->components.end(), [](const SessionType& c) { return c.is_end(); });
  return s.is_end();
}

// Every entry is `end`, or a parallel composition of `end`s.
inline bool end_pred(const DeltaCtx& d) {
  return std::all_of(d.entries.begin(), d.entries.end(), [](const auto& e) { return end_pred(e.second); });
}

// Lazily enumerates every split d = d1 . d2. A plain entry goes wholly left
// or right; a parallel entry's component multiset is divided in every
// distinct way. Identical components are interchangeable, so each distinct
// split is produced once.
class SplitEnumerator {
 public:
  explicit SplitEnumerator(const DeltaCtx& d) {
    for (const auto& [role, s] : d.entries) {
      Slot slot{role, {}, {}};
      for (auto& c : components(s)) {
        std::string key = render(c);
        auto it = std::find_if(slot.distinct.begin(), slot.distinct.end(),
                               [&](const auto& x) { return x.first == key; });
        if (it == slot.distinct.end()) {
          slot.distinct.emplace_back(key, std::move(c));
          slot.multiplicity.push_back(1);
        } else {
          ++slot.multiplicity[std::distance(slot.distinct.begin(), it)];
        }
      }
      slots_.push_back(std::move(slot));
    }
    for (const auto& s : slots_) counter_.insert(counter_.end(), s.multiplicity.size(), 0);
  }

  std::optional<std::pair<DeltaCtx, DeltaCtx>> next() {
    if (done_) return std::nullopt;
    std::pair<DeltaCtx, DeltaCtx> out;
    std::size_t k = 0;
    for (const auto& slot : slots_) {
      std::vector<SessionType> left, right;
      for (std::size_t i = 0; i < slot.distinct.size(); ++i, ++k) {
        int to_left = counter_[k];
        for (int j = 0; j < slot.multiplicity[i]; ++j) (j < to_left ? left : right).push_back(slot.distinct[i].second);
      }
      place(out.first, slot.role, std::move(left));
      place(out.second, slot.role, std::move(right));
    }
    advance();
    return out;
  }

  // Input range so that `for (auto& [l, r] : ctx_splits(d))` works.
  class iterator {
   public:
    using value_type = std::pair<DeltaCtx, DeltaCtx>;
    using difference_type = std::ptrdiff_t;
    iterator() = default;
    explicit iterator(SplitEnumerator* e) : e_(e) { ++*this; }
    const value_type& operator*() const { return *cur_; }
    const value_type* operator->() const { return &*cur_; }
    iterator& operator++() {
      cur_ = e_->next();
      return *this;
    }
    void operator++(int) { ++*this; }
    bool operator==(std::default_sentinel_t) const { return !cur_; }

   private:
    SplitEnumerator* e_ = nullptr;
    std::optional<value_type> cur_;
  };
  iterator begin() { return iterator(this); }
  std::default_sentinel_t end() { return {}; }

 private:
  struct Slot {
    Role role;
    std::vector<std::pair<std::string, SessionType>> distinct;
    std::vector<int> multiplicity;
  };

  static void place(DeltaCtx& d, const Role& role, std::vector<SessionType> cs) {
    if (cs.empty()) return;
    if (cs.size() == 1) d.entries.emplace(role, std::move(cs.front()));
    else d.entries.emplace(role, normalize(SessionType{ParType{std::move(cs)}}));
  }

  void advance() {
    std::size_t k = 0;
    std::vector<int> limits;
    for (const auto& s : slots_) limits.insert(limits.end(), s.multiplicity.begin(), s.multiplicity.end());
    for (k = 0; k < counter_.size(); ++k) {
      if (counter_[k] < limits[k]) {
        ++counter_[k];
        return;
      }
      counter_[k] = 0;
    }
    done_ = true;
  }

  std::vector<Slot> slots_;
  std::vector<int> counter_;
  bool done_ = false;
};

inline SplitEnumerator ctx_splits(const DeltaCtx& d) { return SplitEnumerator(d); }

// Removes one component `c` from role's entry; the entry disappears with
// its last component.
inline DeltaCtx remove_component(DeltaCtx d, const Role& role, const SessionType& c) {
  auto it = d.entries.find(role);
  if (it == d.entries.end()) return d;
  if (auto* p = std::get_if<ParType>(&it->second.node)) {
    auto pos = std::find(p->components.begin(), p->components.end(), c);
    if (pos != p->components.end()) p->components.erase(pos);
    if (p->components.size() == 1) {
      SessionType last = std::move(p->components.front());
      it->second = std::move(last);
    }
  } else if (it->second == c) {
    d.entries.erase(it);
  }
  return d;
}

}  // namespace magpi
