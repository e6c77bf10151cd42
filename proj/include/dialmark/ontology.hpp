#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dialmark/rng.hpp"

namespace dialmark {

enum class GroupVisibility { group1_and_2, group2_only, inform_only };

struct Slot {
  std::string name;
  std::vector<std::string> values;
  bool constrainable = false;
  GroupVisibility visibility = GroupVisibility::inform_only;
};

struct Item {
  std::string id;
  std::vector<int> assignment;  // value index per slot, parallel to ItemSet::slots
};

// A constraint set maps slot index -> required value index; -1 means unconstrained.
struct ConstraintSet {
  std::vector<int> required;

  explicit ConstraintSet(int n_slots = 0) : required(n_slots, -1) {}
  bool constrains(int slot) const { return required[slot] >= 0; }
  void set(int slot, int value) { required[slot] = value; }
  int count() const {
    int c = 0;
    for (int v : required)
      if (v >= 0) ++c;
    return c;
  }
  bool satisfied_by(const Item& item) const {
    for (size_t f = 0; f < required.size(); ++f)
      if (required[f] >= 0 && item.assignment[f] != required[f]) return false;
    return true;
  }
};

class ItemSet {
 public:
  std::string name;
  std::vector<Slot> slots;
  std::vector<Item> items;

  int slot_index(const std::string& slot_name) const;
  int value_index(int slot, const std::string& value) const;
  std::vector<int> constrainable_slots() const;
  std::vector<int> group1_slots() const;  // constrainable and visible to group 1
  int n_slots() const { return static_cast<int>(slots.size()); }
  int n_items() const { return static_cast<int>(items.size()); }

  // Structural checks: unique names, consistent assignment arity, every value
  // used by at least one item, >= 3 constrainable slots with >= 1 in group 1.
  void validate() const;
};

// Items whose assignments satisfy every constraint; preserves item order.
std::vector<int> filter_candidates(const ItemSet& domain, const ConstraintSet& constraints);

// Shannon entropy (bits) of slot value frequencies across the given candidates.
double slot_entropy(const ItemSet& domain, const std::vector<int>& candidates, int slot);

// Highest-entropy slot among `slots` over the candidates; ties broken uniformly
// at random. Empty when no listed slot has positive entropy (no slot
// differentiates the candidates).
std::optional<int> max_entropy_slot(const ItemSet& domain, const std::vector<int>& candidates,
                                    const std::vector<int>& slots, RandomStream& rng);

// ---- synthetic domain generation ----

struct SlotSpec {
  std::string name;
  int n_values = 0;
  GroupVisibility visibility = GroupVisibility::inform_only;
  bool constrainable = false;
  // Aligned slots take one value per item family; free slots are assigned
  // independently. Ignored when n_families == 0.
  bool family_aligned = false;
  // Skew > 0 concentrates this slot's item distribution on value 0 (that many
  // items get value 0, the rest spread over remaining values round-robin).
  int skew_major_items = 0;
};

struct DomainSpec {
  std::string name;
  int n_items = 0;
  int n_families = 0;  // 0 = independent items
  std::uint64_t seed = 0;
  std::vector<SlotSpec> slots;
};

// Deterministic generator; same spec -> identical ItemSet. Throws
// std::invalid_argument on infeasible specs (value counts exceeding item
// counts, aligned counts exceeding family counts, and similar).
ItemSet generate_synthetic_domain(const DomainSpec& spec);

// The four shipped benchmark domains (see data/*.json for the frozen output).
DomainSpec fin_spec();
DomainSpec cr_spec();
DomainSpec sfr_spec();
DomainSpec lap_spec();

// JSON serialization. load throws std::runtime_error with the offending
// slot/item named in the message.
ItemSet load_itemset_json(const std::string& path);
void save_itemset_json(const ItemSet& domain, const std::string& path);
ItemSet parse_itemset_json(const std::string& text);
std::string itemset_to_json(const ItemSet& domain);

}  // namespace dialmark
