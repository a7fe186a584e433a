#include "aogplan/vocab.hpp"

#include <stdexcept>

namespace aogplan {
namespace vocab {

namespace {

template <size_t N>
int lookup(const std::array<std::string_view, N>& names, std::string_view name) {
  for (size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

template <size_t N>
std::string_view name_of(const std::array<std::string_view, N>& names, int id,
                         const char* what) {
  if (id < 0 || id >= static_cast<int>(N)) {
    throw std::out_of_range(std::string(what) + " id out of range: " +
                            std::to_string(id));
  }
  return names[static_cast<size_t>(id)];
}

}  // namespace

int action_id(std::string_view name) { return lookup(kActionNames, name); }
int object_id(std::string_view name) { return lookup(kObjectNames, name); }
int task_id(std::string_view name) { return lookup(kTaskNames, name); }

std::string_view action_name(int id) { return name_of(kActionNames, id, "action"); }
std::string_view object_name(int id) { return name_of(kObjectNames, id, "object"); }
std::string_view task_name(int id) { return name_of(kTaskNames, id, "task"); }

}  // namespace vocab

std::string AtomicAction::to_string() const {
  return "(" + std::string(vocab::action_name(action)) + ", " +
         std::string(vocab::object_name(object)) + ")";
}

}  // namespace aogplan
