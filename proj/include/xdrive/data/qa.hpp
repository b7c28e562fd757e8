#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "xdrive/sim/track.hpp"

namespace xdrive::data {

struct QaTemplate {
  sim::ActionCategory category;
  std::string_view question;
  std::string_view answer;
};

// The five annotated question-answer pairs, in category order.
const std::array<QaTemplate, sim::kCategoryCount>& qa_templates();
const QaTemplate& qa_for(sim::ActionCategory c);
std::optional<sim::ActionCategory> category_of_answer(std::string_view answer);
std::optional<sim::ActionCategory> category_of_question(std::string_view question);

}  // namespace xdrive::data
