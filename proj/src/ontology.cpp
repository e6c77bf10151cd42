#include "dialmark/ontology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dialmark {

namespace {

std::string visibility_name(GroupVisibility v) {
  switch (v) {
    case GroupVisibility::group1_and_2: return "group1_and_2";
    case GroupVisibility::group2_only: return "group2_only";
    case GroupVisibility::inform_only: return "inform_only";
  }
  return "inform_only";
}

GroupVisibility visibility_from_name(const std::string& s, const std::string& where) {
  if (s == "group1_and_2") return GroupVisibility::group1_and_2;
  if (s == "group2_only") return GroupVisibility::group2_only;
  if (s == "inform_only") return GroupVisibility::inform_only;
  throw std::runtime_error(where + ": unknown group_visibility '" + s + "'");
}

}  // namespace

int ItemSet::slot_index(const std::string& slot_name) const {
  for (size_t i = 0; i < slots.size(); ++i)
    if (slots[i].name == slot_name) return static_cast<int>(i);
  return -1;
}

int ItemSet::value_index(int slot, const std::string& value) const {
  const auto& vals = slots[slot].values;
  for (size_t i = 0; i < vals.size(); ++i)
    if (vals[i] == value) return static_cast<int>(i);
  return -1;
}

std::vector<int> ItemSet::constrainable_slots() const {
  std::vector<int> out;
  for (size_t i = 0; i < slots.size(); ++i)
    if (slots[i].constrainable) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> ItemSet::group1_slots() const {
  std::vector<int> out;
  for (size_t i = 0; i < slots.size(); ++i)
    if (slots[i].constrainable && slots[i].visibility == GroupVisibility::group1_and_2)
      out.push_back(static_cast<int>(i));
  return out;
}

void ItemSet::validate() const {
  if (name.empty()) throw std::runtime_error("domain: empty name");
  if (items.empty()) throw std::runtime_error("domain '" + name + "': no items");
  if (slots.empty()) throw std::runtime_error("domain '" + name + "': no slots");

  std::set<std::string> slot_names;
  for (const auto& s : slots) {
    if (!slot_names.insert(s.name).second)
      throw std::runtime_error("domain '" + name + "': duplicate slot '" + s.name + "'");
    if (s.values.empty())
      throw std::runtime_error("slot '" + s.name + "': no values");
    std::set<std::string> vals(s.values.begin(), s.values.end());
    if (vals.size() != s.values.size())
      throw std::runtime_error("slot '" + s.name + "': duplicate values");
    bool should_constrain = s.visibility != GroupVisibility::inform_only;
    if (s.constrainable != should_constrain)
      throw std::runtime_error("slot '" + s.name + "': constrainable flag contradicts visibility");
  }

  std::set<std::string> item_ids;
  for (const auto& it : items) {
    if (!item_ids.insert(it.id).second)
      throw std::runtime_error("domain '" + name + "': duplicate item id '" + it.id + "'");
    if (it.assignment.size() != slots.size())
      throw std::runtime_error("item '" + it.id + "': assignment covers " +
                               std::to_string(it.assignment.size()) + " slots, expected " +
                               std::to_string(slots.size()));
    for (size_t f = 0; f < slots.size(); ++f)
      if (it.assignment[f] < 0 || it.assignment[f] >= static_cast<int>(slots[f].values.size()))
        throw std::runtime_error("item '" + it.id + "': value index out of range for slot '" +
                                 slots[f].name + "'");
  }

  // Every value must be realized by some item, otherwise goals seeded from
  // items can never produce it and entropy bookkeeping sees phantom values.
  for (size_t f = 0; f < slots.size(); ++f) {
    std::vector<bool> seen(slots[f].values.size(), false);
    for (const auto& it : items) seen[it.assignment[f]] = true;
    for (size_t v = 0; v < seen.size(); ++v)
      if (!seen[v])
        throw std::runtime_error("slot '" + slots[f].name + "': value '" + slots[f].values[v] +
                                 "' appears on no item");
  }

  if (constrainable_slots().size() < 3)
    throw std::runtime_error("domain '" + name + "': fewer than 3 constrainable slots");
  if (group1_slots().empty())
    throw std::runtime_error("domain '" + name + "': no group-1 visible constrainable slot");
}

std::vector<int> filter_candidates(const ItemSet& domain, const ConstraintSet& constraints) {
  std::vector<int> out;
  for (int i = 0; i < domain.n_items(); ++i)
    if (constraints.satisfied_by(domain.items[i])) out.push_back(i);
  return out;
}

double slot_entropy(const ItemSet& domain, const std::vector<int>& candidates, int slot) {
  if (candidates.empty()) return 0.0;
  std::vector<int> counts(domain.slots[slot].values.size(), 0);
  for (int i : candidates) ++counts[domain.items[i].assignment[slot]];
  double n = static_cast<double>(candidates.size());
  double h = 0.0;
  for (int c : counts) {
    if (c == 0) continue;
    double p = c / n;
    h -= p * std::log2(p);
  }
  return h;
}

std::optional<int> max_entropy_slot(const ItemSet& domain, const std::vector<int>& candidates,
                                    const std::vector<int>& slots, RandomStream& rng) {
  constexpr double kTieTol = 1e-12;
  double best = 0.0;
  std::vector<int> argmax;
  for (int f : slots) {
    double h = slot_entropy(domain, candidates, f);
    if (h <= 0.0) continue;
    if (h > best + kTieTol) {
      best = h;
      argmax.assign(1, f);
    } else if (h >= best - kTieTol) {
      argmax.push_back(f);
    }
  }
  if (argmax.empty()) return std::nullopt;
  return argmax[rng.uniform_int(static_cast<int>(argmax.size()))];
}

// ---- generation ----

ItemSet generate_synthetic_domain(const DomainSpec& spec) {
  if (spec.n_items <= 0) throw std::invalid_argument("domain spec: n_items must be positive");
  if (spec.slots.empty()) throw std::invalid_argument("domain spec: no slots");
  int families = spec.n_families;
  int variants = 1;
  if (families > 0) {
    if (spec.n_items % families != 0)
      throw std::invalid_argument("domain spec: n_items not divisible by n_families");
    variants = spec.n_items / families;
  }

  ItemSet out;
  out.name = spec.name;
  RandomStream root(spec.seed != 0 ? spec.seed : RandomStream::fnv1a(0, spec.name));

  for (const auto& ss : spec.slots) {
    if (ss.n_values <= 0)
      throw std::invalid_argument("slot '" + ss.name + "': n_values must be positive");
    if (ss.n_values > spec.n_items)
      throw std::invalid_argument("slot '" + ss.name + "': more values than items");
    if (families > 0 && ss.family_aligned && ss.n_values > families)
      throw std::invalid_argument("slot '" + ss.name + "': aligned slot has more values than families");
    if (ss.skew_major_items > 0 && ss.skew_major_items + ss.n_values - 1 > spec.n_items)
      throw std::invalid_argument("slot '" + ss.name + "': skew leaves no room for value coverage");
    Slot s;
    s.name = ss.name;
    s.constrainable = ss.constrainable;
    s.visibility = ss.visibility;
    for (int v = 0; v < ss.n_values; ++v) s.values.push_back(ss.name + "_v" + std::to_string(v));
    out.slots.push_back(std::move(s));
  }

  for (int i = 0; i < spec.n_items; ++i) {
    Item it;
    char buf[16];
    std::snprintf(buf, sizeof buf, "_%03d", i);
    it.id = spec.name + buf;
    it.assignment.assign(spec.slots.size(), 0);
    out.items.push_back(std::move(it));
  }

  for (size_t f = 0; f < spec.slots.size(); ++f) {
    const auto& ss = spec.slots[f];
    RandomStream rng = root.substream("slot", f);
    if (families > 0 && ss.family_aligned) {
      // One value per family, distinct per-slot permutation so aligned slots
      // aren't trivially identical columns.
      std::vector<int> fam_value(families);
      for (int k = 0; k < families; ++k) fam_value[k] = k % ss.n_values;
      rng.shuffle(fam_value);
      for (int i = 0; i < spec.n_items; ++i) out.items[i].assignment[f] = fam_value[i / variants];
    } else if (families > 0 && ss.constrainable) {
      // Variant discriminator: first variant of each family shares value 0,
      // later variants walk the remaining values so families are separable.
      for (int k = 0; k < families; ++k)
        for (int j = 0; j < variants; ++j) {
          int idx = k * variants + j;
          out.items[idx].assignment[f] =
              j == 0 ? 0 : 1 + (k + (j - 1) * families) % (ss.n_values - 1);
        }
    } else {
      std::vector<int> vals;
      vals.reserve(spec.n_items);
      if (ss.skew_major_items > 0) {
        for (int i = 0; i < ss.skew_major_items; ++i) vals.push_back(0);
        for (int v = 1; v < ss.n_values; ++v) vals.push_back(v);
        for (int i = static_cast<int>(vals.size()); i < spec.n_items; ++i)
          vals.push_back(1 + (i % (ss.n_values - 1)));
      } else {
        for (int i = 0; i < spec.n_items; ++i) vals.push_back(i % ss.n_values);
      }
      rng.shuffle(vals);
      for (int i = 0; i < spec.n_items; ++i) out.items[i].assignment[f] = vals[i];
    }
  }

  out.validate();
  return out;
}

DomainSpec fin_spec() {
  DomainSpec d;
  d.name = "fin";
  d.n_items = 14;
  d.n_families = 7;
  d.seed = 20260801;
  auto g1 = [](const char* n, int v) {
    return SlotSpec{n, v, GroupVisibility::group1_and_2, true, true, 0};
  };
  auto g2 = [](const char* n, int v) {
    return SlotSpec{n, v, GroupVisibility::group2_only, true, true, 0};
  };
  d.slots = {
      g1("minimum_age", 7),
      g1("purpose", 7),
      g1("account", 7),
      g2("name", 7),
      g2("insurance", 7),
      g2("max_duration", 7),
      g2("min_duration", 7),
      g2("max_principal", 7),
      // Discriminates the two variants within a family; skewed so its entropy
      // ranks below the aligned slots and heuristics ask it last.
      SlotSpec{"min_principal", 8, GroupVisibility::group2_only, true, false, 7},
      SlotSpec{"interest_rate", 5, GroupVisibility::inform_only, false, false, 0},
      SlotSpec{"monthly_fee", 4, GroupVisibility::inform_only, false, false, 0},
      SlotSpec{"risk_category", 3, GroupVisibility::inform_only, false, false, 0},
      SlotSpec{"support_channel", 3, GroupVisibility::inform_only, false, false, 0},
  };
  return d;
}

DomainSpec cr_spec() {
  DomainSpec d;
  d.name = "cr";
  d.n_items = 110;
  d.seed = 20260802;
  d.slots = {
      SlotSpec{"price_range", 10, GroupVisibility::group1_and_2, true, false, 0},
      SlotSpec{"area", 10, GroupVisibility::group2_only, true, false, 0},
      SlotSpec{"food", 10, GroupVisibility::group2_only, true, false, 0},
      SlotSpec{"name", 30, GroupVisibility::inform_only, false, false, 0},
      SlotSpec{"phone", 12, GroupVisibility::inform_only, false, false, 0},
      SlotSpec{"address", 12, GroupVisibility::inform_only, false, false, 0},
  };
  return d;
}

DomainSpec sfr_spec() {
  DomainSpec d;
  d.name = "sfr";
  d.n_items = 271;
  d.seed = 20260803;
  d.slots = {
      SlotSpec{"price_range", 4, GroupVisibility::group1_and_2, true, false, 0},
      SlotSpec{"allowed_for_kids", 4, GroupVisibility::group1_and_2, true, false, 0},
      SlotSpec{"good_for_meal", 4, GroupVisibility::group1_and_2, true, false, 0},
      SlotSpec{"area", 4, GroupVisibility::group2_only, true, false, 0},
      SlotSpec{"near", 4, GroupVisibility::group2_only, true, false, 0},
      SlotSpec{"food", 4, GroupVisibility::group2_only, true, false, 0},
      SlotSpec{"name", 28, GroupVisibility::inform_only, false, false, 0},
      SlotSpec{"phone", 12, GroupVisibility::inform_only, false, false, 0},
  };
  return d;
}

DomainSpec lap_spec() {
  DomainSpec d;
  d.name = "lap";
  d.n_items = 123;
  d.seed = 20260804;
  auto g1 = [](const char* n) {
    return SlotSpec{n, 2, GroupVisibility::group1_and_2, true, false, 0};
  };
  auto g2 = [](const char* n) {
    return SlotSpec{n, 2, GroupVisibility::group2_only, true, false, 0};
  };
  d.slots = {
      g1("utility"),
      g1("price_range"),
      g1("weight_range"),
      g1("warranty"),
      g1("business_computing"),
      g2("family"),
      g2("processor_class"),
      g2("sys_memory"),
      g2("platform"),
      g2("drive_range"),
      g2("battery_rating"),
      SlotSpec{"name", 16, GroupVisibility::inform_only, false, false, 0},
      SlotSpec{"price", 8, GroupVisibility::inform_only, false, false, 0},
  };
  return d;
}

// ---- JSON ----

std::string itemset_to_json(const ItemSet& domain) {
  nlohmann::ordered_json j;
  j["name"] = domain.name;
  j["slots"] = nlohmann::ordered_json::array();
  for (const auto& s : domain.slots) {
    nlohmann::ordered_json js;
    js["name"] = s.name;
    js["values"] = s.values;
    js["constrainable"] = s.constrainable;
    js["group_visibility"] = visibility_name(s.visibility);
    j["slots"].push_back(js);
  }
  j["items"] = nlohmann::ordered_json::array();
  for (const auto& it : domain.items) {
    nlohmann::ordered_json ji;
    ji["id"] = it.id;
    nlohmann::ordered_json assign;
    for (size_t f = 0; f < domain.slots.size(); ++f)
      assign[domain.slots[f].name] = domain.slots[f].values[it.assignment[f]];
    ji["assignment"] = assign;
    j["items"].push_back(ji);
  }
  return j.dump(2) + "\n";
}

ItemSet parse_itemset_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("domain JSON: ") + e.what());
  }

  ItemSet out;
  if (!j.contains("name") || !j["name"].is_string())
    throw std::runtime_error("domain JSON: missing string field 'name'");
  out.name = j["name"].get<std::string>();

  if (!j.contains("slots") || !j["slots"].is_array())
    throw std::runtime_error("domain '" + out.name + "': missing array field 'slots'");
  int slot_no = 0;
  for (const auto& js : j["slots"]) {
    std::string where = "slot #" + std::to_string(slot_no);
    if (js.contains("name") && js["name"].is_string())
      where = "slot '" + js["name"].get<std::string>() + "'";
    Slot s;
    if (!js.contains("name") || !js["name"].is_string())
      throw std::runtime_error(where + ": missing string field 'name'");
    s.name = js["name"].get<std::string>();
    if (!js.contains("values") || !js["values"].is_array() || js["values"].empty())
      throw std::runtime_error(where + ": missing non-empty array field 'values'");
    for (const auto& v : js["values"]) {
      if (!v.is_string()) throw std::runtime_error(where + ": non-string value");
      s.values.push_back(v.get<std::string>());
    }
    if (!js.contains("constrainable") || !js["constrainable"].is_boolean())
      throw std::runtime_error(where + ": missing boolean field 'constrainable'");
    s.constrainable = js["constrainable"].get<bool>();
    if (!js.contains("group_visibility") || !js["group_visibility"].is_string())
      throw std::runtime_error(where + ": missing string field 'group_visibility'");
    s.visibility = visibility_from_name(js["group_visibility"].get<std::string>(), where);
    out.slots.push_back(std::move(s));
    ++slot_no;
  }

  if (!j.contains("items") || !j["items"].is_array())
    throw std::runtime_error("domain '" + out.name + "': missing array field 'items'");
  int item_no = 0;
  for (const auto& ji : j["items"]) {
    std::string where = "item #" + std::to_string(item_no);
    if (ji.contains("id") && ji["id"].is_string())
      where = "item '" + ji["id"].get<std::string>() + "'";
    Item it;
    if (!ji.contains("id") || !ji["id"].is_string())
      throw std::runtime_error(where + ": missing string field 'id'");
    it.id = ji["id"].get<std::string>();
    if (!ji.contains("assignment") || !ji["assignment"].is_object())
      throw std::runtime_error(where + ": missing object field 'assignment'");
    it.assignment.assign(out.slots.size(), -1);
    for (const auto& [slot_name, value] : ji["assignment"].items()) {
      int f = out.slot_index(slot_name);
      if (f < 0) throw std::runtime_error(where + ": assignment names unknown slot '" + slot_name + "'");
      if (!value.is_string())
        throw std::runtime_error(where + ": slot '" + slot_name + "' has non-string value");
      int v = out.value_index(f, value.get<std::string>());
      if (v < 0)
        throw std::runtime_error(where + ": slot '" + slot_name + "' has unknown value '" +
                                 value.get<std::string>() + "'");
      it.assignment[f] = v;
    }
    for (size_t f = 0; f < out.slots.size(); ++f)
      if (it.assignment[f] < 0)
        throw std::runtime_error(where + ": no value for slot '" + out.slots[f].name + "'");
    out.items.push_back(std::move(it));
    ++item_no;
  }

  out.validate();
  return out;
}

ItemSet load_itemset_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open domain file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_itemset_json(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_itemset_json(const ItemSet& domain, const std::string& path) {
  std::ofstream outf(path);
  if (!outf) throw std::runtime_error("cannot write domain file '" + path + "'");
  outf << itemset_to_json(domain);
}

}  // namespace dialmark
