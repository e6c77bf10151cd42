#include "dialmark/acts.hpp"

namespace dialmark {

std::string to_string(const ItemSet& domain, const SystemAct& act) {
  switch (act.kind) {
    case SystemActKind::request:
      return "request(" + domain.slots[act.slot].name + ")";
    case SystemActKind::confirm:
      return "confirm(" + domain.slots[act.slot].name + "=" +
             domain.slots[act.slot].values[act.value] + ")";
    case SystemActKind::select:
      return "select(" + domain.slots[act.slot].name + "=" +
             domain.slots[act.slot].values[act.value] + "|" +
             domain.slots[act.slot].values[act.second_value] + ")";
    case SystemActKind::recommend:
      return "recommend(" + domain.items[act.item].id + ")";
    case SystemActKind::bye:
      return "bye()";
  }
  return "?";
}

std::string to_string(const ItemSet& domain, const UserAct& act) {
  switch (act.kind) {
    case UserActKind::inform:
      return "inform(" + domain.slots[act.slot].name + "=" +
             domain.slots[act.slot].values[act.value] + ")";
    case UserActKind::affirm:
      return "affirm()";
    case UserActKind::deny:
      return "deny()";
    case UserActKind::null_act:
      return "null()";
    case UserActKind::bye:
      return "bye()";
  }
  return "?";
}

}  // namespace dialmark
