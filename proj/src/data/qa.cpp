#include "xdrive/data/qa.hpp"

namespace xdrive::data {

using sim::ActionCategory;

const std::array<QaTemplate, sim::kCategoryCount>& qa_templates() {
  static const std::array<QaTemplate, sim::kCategoryCount> table = {{
      {ActionCategory::go_straight, "Why is the car going straight?", "Because the road is clear."},
      {ActionCategory::turn_left, "Why is the car turning to the left?", "Because the road is bending to the left."},
      {ActionCategory::turn_left_t, "Why is the car turning left at T-junction?",
       "Because there is no obstacle on the right side and turning left can be performed safely."},
      {ActionCategory::turn_right, "Why is the car turning to the right?", "Because the road is bending to the right."},
      {ActionCategory::turn_right_t, "Why is the car turning right at T-junction?",
       "Because there is no obstacle on the left side and turning right can be performed safely."},
  }};
  return table;
}

const QaTemplate& qa_for(ActionCategory c) { return qa_templates()[static_cast<std::size_t>(sim::index_of(c))]; }

std::optional<ActionCategory> category_of_answer(std::string_view answer) {
  for (const auto& t : qa_templates())
    if (t.answer == answer) return t.category;
  return std::nullopt;
}

std::optional<ActionCategory> category_of_question(std::string_view question) {
  for (const auto& t : qa_templates())
    if (t.question == question) return t.category;
  return std::nullopt;
}

}  // namespace xdrive::data
