#include "convtopic/labels.hpp"

#include <stdexcept>

namespace convtopic {
namespace {

constexpr std::array<std::string_view, kNumTopics> kTopicNames = {
    "Politics",           "Fashion",           "Sports",
    "ScienceAndTechnology", "EntertainmentMusic", "EntertainmentMovies",
    "EntertainmentBooks", "EntertainmentGeneral", "Phatic",
    "Interactive",        "Other",             "InappropriateContent",
};

constexpr std::array<std::string_view, kNumDialogActs> kActNames = {
    "InformationRequest",  "InformationDelivery",   "OpinionRequest", "OpinionExpression",
    "GeneralChat",         "Clarification",         "TopicSwitch",    "UserInstruction",
    "InstructionResponse", "Inappropriate",         "Other",          "FrustrationExpression",
    "MultipleGoals",       "NotSet",
};

template <typename E, std::size_t N>
std::optional<E> find(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Topic t) { return kTopicNames.at(index_of(t)); }
std::string_view to_string(DialogAct a) { return kActNames.at(index_of(a)); }
std::string_view to_string(LabelSpace s) { return s == LabelSpace::kTopic ? "topic" : "act"; }

std::optional<Topic> parse_topic(std::string_view s) { return find<Topic>(kTopicNames, s); }
std::optional<DialogAct> parse_dialog_act(std::string_view s) {
  return find<DialogAct>(kActNames, s);
}
std::optional<LabelSpace> parse_label_space(std::string_view s) {
  if (s == "topic") return LabelSpace::kTopic;
  if (s == "act") return LabelSpace::kDialogAct;
  return std::nullopt;
}

std::size_t label_count(LabelSpace s) {
  return s == LabelSpace::kTopic ? kNumTopics : kNumDialogActs;
}

std::string_view label_name(LabelSpace s, std::size_t index) {
  if (index >= label_count(s)) throw std::out_of_range("label index out of range");
  return s == LabelSpace::kTopic ? kTopicNames[index] : kActNames[index];
}

}  // namespace convtopic
