#pragma once

#include <string>
#include <vector>

#include "dialmark/ontology.hpp"

namespace dialmark {

enum class SystemActKind { request, confirm, select, recommend, bye };
enum class UserActKind { inform, affirm, deny, null_act, bye };

struct SystemAct {
  SystemActKind kind = SystemActKind::bye;
  int slot = -1;          // domain slot index (request/confirm/select)
  int value = -1;         // confirmed or first offered value
  int second_value = -1;  // second offered value (select)
  int item = -1;          // recommended item index

  static SystemAct make_request(int slot) { return {SystemActKind::request, slot, -1, -1, -1}; }
  static SystemAct make_confirm(int slot, int value) {
    return {SystemActKind::confirm, slot, value, -1, -1};
  }
  static SystemAct make_select(int slot, int v1, int v2) {
    return {SystemActKind::select, slot, v1, v2, -1};
  }
  static SystemAct make_recommend(int item) { return {SystemActKind::recommend, -1, -1, -1, item}; }
  static SystemAct make_bye() { return {SystemActKind::bye, -1, -1, -1, -1}; }
};

struct UserAct {
  UserActKind kind = UserActKind::null_act;
  int slot = -1;   // inform only
  int value = -1;  // inform only

  static UserAct make_inform(int slot, int value) { return {UserActKind::inform, slot, value}; }
  static UserAct make_affirm() { return {UserActKind::affirm, -1, -1}; }
  static UserAct make_deny() { return {UserActKind::deny, -1, -1}; }
  static UserAct make_null() { return {UserActKind::null_act, -1, -1}; }
  static UserAct make_bye() { return {UserActKind::bye, -1, -1}; }
};

// A user act as the system hears it: possibly corrupted, with a decoder
// confidence attached.
struct ScoredUserAct {
  UserAct act;
  double confidence = 1.0;
};

std::string to_string(const ItemSet& domain, const SystemAct& act);
std::string to_string(const ItemSet& domain, const UserAct& act);

}  // namespace dialmark
