#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace convtopic {

enum class Topic {
  Politics,
  Fashion,
  Sports,
  ScienceAndTechnology,
  EntertainmentMusic,
  EntertainmentMovies,
  EntertainmentBooks,
  EntertainmentGeneral,
  Phatic,
  Interactive,
  Other,
  InappropriateContent,
};

enum class DialogAct {
  InformationRequest,
  InformationDelivery,
  OpinionRequest,
  OpinionExpression,
  GeneralChat,
  Clarification,
  TopicSwitch,
  UserInstruction,
  InstructionResponse,
  Inappropriate,
  Other,
  FrustrationExpression,
  MultipleGoals,
  NotSet,
};

inline constexpr std::size_t kNumTopics = 12;
inline constexpr std::size_t kNumDialogActs = 14;

/// Which label space a classifier predicts.
enum class LabelSpace { kTopic, kDialogAct };

std::string_view to_string(Topic t);
std::string_view to_string(DialogAct a);
std::string_view to_string(LabelSpace s);

std::optional<Topic> parse_topic(std::string_view s);
std::optional<DialogAct> parse_dialog_act(std::string_view s);
std::optional<LabelSpace> parse_label_space(std::string_view s);

std::size_t label_count(LabelSpace s);
/// Name of label `index` in space `s`.
std::string_view label_name(LabelSpace s, std::size_t index);

inline std::size_t index_of(Topic t) { return static_cast<std::size_t>(t); }
inline std::size_t index_of(DialogAct a) { return static_cast<std::size_t>(a); }

}  // namespace convtopic
