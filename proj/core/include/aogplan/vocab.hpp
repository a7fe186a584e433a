#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace aogplan {

// Fixed vocabularies for primitive actions, associated objects and tasks.
// The three special tokens (start, stop, task fail) occupy the top indices
// of both the action and the object vocabulary.
namespace vocab {

inline constexpr int kNumPrimitiveActions = 12;
inline constexpr int kNumObjects = 12;
inline constexpr int kNumActionClasses = 15;  // primitives + specials
inline constexpr int kNumObjectClasses = 15;  // objects + specials
inline constexpr int kNumTasks = 15;

inline constexpr int kStart = 12;
inline constexpr int kStop = 13;
inline constexpr int kTaskFail = 14;

inline constexpr std::array<std::string_view, kNumActionClasses> kActionNames = {
    "move to", "grasp",   "place back", "pour into", "open",  "pour away",
    "hold",    "heat",    "close",      "turn on",   "clean", "put into",
    "start",   "stop",    "task fail"};

inline constexpr std::array<std::string_view, kNumObjectClasses> kObjectNames = {
    "cup",   "pot",    "water dispenser", "tea box", "water",   "bowl",
    "eraser", "board", "washing machine", "teapot",  "clothes", "closet",
    "start", "stop",   "task fail"};

inline constexpr std::array<std::string_view, kNumTasks> kTaskNames = {
    "pour the water in the cup into the bowl",
    "make tea with the cup",
    "make tea with the cup using water from the water dispenser",
    "clean the board",
    "get a cup of hot water",
    "get a cup of hot water from the pot",
    "pour a cup of water",
    "pour a cup of water from the pot",
    "pour a cup of tea from the teapot",
    "wash the clothes with the washing machine",
    "wash the clothes in the washing machine",
    "put the clothes in the closet",
    "make tea with the cup using water from the pot",
    "get a cup of hot water from the water dispenser",
    "pour a cup of water from the water dispenser"};

// Lookup by name; returns -1 if unknown.
int action_id(std::string_view name);
int object_id(std::string_view name);
int task_id(std::string_view name);

std::string_view action_name(int id);
std::string_view object_name(int id);
std::string_view task_name(int id);

}  // namespace vocab

// A primitive action applied to an associated object. The special pairs
// (start, start), (stop, stop) and (task fail, task fail) use the special
// vocabulary indices in both slots.
struct AtomicAction {
  int action = 0;
  int object = 0;

  auto operator<=>(const AtomicAction&) const = default;

  static AtomicAction start() { return {vocab::kStart, vocab::kStart}; }
  static AtomicAction stop() { return {vocab::kStop, vocab::kStop}; }
  static AtomicAction task_fail() { return {vocab::kTaskFail, vocab::kTaskFail}; }

  bool is_stop() const { return action == vocab::kStop && object == vocab::kStop; }
  bool is_task_fail() const {
    return action == vocab::kTaskFail && object == vocab::kTaskFail;
  }

  std::string to_string() const;
};

}  // namespace aogplan
