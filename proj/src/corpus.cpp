#include "convtopic/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "convtopic/rng.hpp"
#include "convtopic/text.hpp"

namespace convtopic {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

CorpusError::CorpusError(std::size_t line, const std::string& field, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         "field '" + field + "': " + message),
      line_(line),
      field_(field) {}

namespace {

// Schema walker that reports the failing line and dotted field path.
struct Reader {
  std::size_t line;

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    throw CorpusError(line, field, msg);
  }

  void only_fields(const json& obj, const std::string& where,
                   std::initializer_list<std::string_view> allowed) const {
    if (!obj.is_object()) fail(where, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
        fail(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
      }
    }
  }

  const json& require(const json& obj, const std::string& where, const std::string& key) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(where.empty() ? key : where + "." + key, "missing");
    return *it;
  }

  Topic topic(const json& v, const std::string& field) const {
    if (!v.is_string()) fail(field, "expected a topic name");
    auto t = parse_topic(v.get<std::string>());
    if (!t) fail(field, "unknown topic label \"" + v.get<std::string>() + "\"");
    return *t;
  }

  DialogAct act(const json& v, const std::string& field) const {
    if (!v.is_string()) fail(field, "expected a dialog act name");
    auto a = parse_dialog_act(v.get<std::string>());
    if (!a) fail(field, "unknown dialog act label \"" + v.get<std::string>() + "\"");
    return *a;
  }

  int binary(const json& v, const std::string& field) const {
    if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1)) fail(field, "expected 0 or 1");
    return v.get<int>();
  }

  Utterance utterance(const json& obj, const std::string& where, Speaker speaker) const {
    only_fields(obj, where, {"text", "topic", "dialog_act", "keywords", "ratings"});
    Utterance u;
    u.speaker = speaker;
    const json& text = require(obj, where, "text");
    if (!text.is_string()) fail(where + ".text", "expected a string");
    u.text = text.get<std::string>();
    if (auto it = obj.find("topic"); it != obj.end() && !it->is_null()) {
      u.topic = topic(*it, where + ".topic");
    }
    if (auto it = obj.find("dialog_act"); it != obj.end() && !it->is_null()) {
      u.dialog_act = act(*it, where + ".dialog_act");
    }
    if (auto it = obj.find("keywords"); it != obj.end()) {
      if (!it->is_array()) fail(where + ".keywords", "expected an array");
      const std::size_t n_tokens = tokenize(u.text).size();
      for (std::size_t k = 0; k < it->size(); ++k) {
        const std::string kw = where + ".keywords[" + std::to_string(k) + "]";
        const json& entry = (*it)[k];
        only_fields(entry, kw, {"index", "topic"});
        const json& index = require(entry, kw, "index");
        if (!index.is_number_unsigned()) fail(kw + ".index", "expected a non-negative integer");
        KeywordSpan span{index.get<std::size_t>(), topic(require(entry, kw, "topic"), kw + ".topic")};
        if (span.token_index >= n_tokens) {
          fail(kw + ".index", "token index " + std::to_string(span.token_index) +
                                  " out of range for " + std::to_string(n_tokens) + " tokens");
        }
        u.keyword_spans.push_back(span);
      }
    }
    if (auto it = obj.find("ratings"); it != obj.end()) {
      if (speaker != Speaker::kChatbot) fail(where + ".ratings", "ratings allowed on chatbot only");
      const std::string r = where + ".ratings";
      only_fields(*it, r, {"comprehensible", "relevant", "interesting", "continue"});
      ResponseRatings rr;
      rr.comprehensible = binary(require(*it, r, "comprehensible"), r + ".comprehensible");
      rr.relevant = binary(require(*it, r, "relevant"), r + ".relevant");
      rr.interesting = binary(require(*it, r, "interesting"), r + ".interesting");
      rr.continue_conversation = binary(require(*it, r, "continue"), r + ".continue");
      u.ratings = rr;
    }
    return u;
  }
};

ordered_json utterance_json(const Utterance& u) {
  ordered_json j;
  j["text"] = u.text;
  if (u.topic) j["topic"] = std::string(to_string(*u.topic));
  if (u.dialog_act) j["dialog_act"] = std::string(to_string(*u.dialog_act));
  if (!u.keyword_spans.empty()) {
    ordered_json kws = ordered_json::array();
    for (const auto& k : u.keyword_spans) {
      ordered_json e;
      e["index"] = k.token_index;
      e["topic"] = std::string(to_string(k.topic));
      kws.push_back(std::move(e));
    }
    j["keywords"] = std::move(kws);
  }
  if (u.ratings) {
    ordered_json r;
    r["comprehensible"] = u.ratings->comprehensible;
    r["relevant"] = u.ratings->relevant;
    r["interesting"] = u.ratings->interesting;
    r["continue"] = u.ratings->continue_conversation;
    j["ratings"] = std::move(r);
  }
  return j;
}

}  // namespace

Conversation parse_conversation(std::string_view json_line, std::size_t line) {
  Reader rd{line};
  json root;
  try {
    root = json::parse(json_line);
  } catch (const json::parse_error& e) {
    rd.fail("<record>", std::string("invalid syntax: ") + e.what());
  }
  rd.only_fields(root, "", {"id", "rating", "turns"});
  Conversation conv;
  const json& id = rd.require(root, "", "id");
  if (!id.is_string() || id.get<std::string>().empty()) rd.fail("id", "expected a nonempty string");
  conv.id = id.get<std::string>();
  if (auto it = root.find("rating"); it != root.end() && !it->is_null()) {
    if (!it->is_number()) rd.fail("rating", "expected a number");
    const double r = it->get<double>();
    if (r < 1.0 || r > 5.0) rd.fail("rating", "must lie in [1, 5]");
    conv.user_rating = r;
  }
  const json& turns = rd.require(root, "", "turns");
  if (!turns.is_array() || turns.empty()) rd.fail("turns", "expected a nonempty array");
  for (std::size_t t = 0; t < turns.size(); ++t) {
    const std::string where = "turns[" + std::to_string(t) + "]";
    rd.only_fields(turns[t], where, {"user", "chatbot"});
    Turn turn;
    turn.user = rd.utterance(rd.require(turns[t], where, "user"), where + ".user", Speaker::kUser);
    turn.chatbot =
        rd.utterance(rd.require(turns[t], where, "chatbot"), where + ".chatbot", Speaker::kChatbot);
    conv.turns.push_back(std::move(turn));
  }
  return conv;
}

std::string serialize_conversation(const Conversation& conv) {
  ordered_json j;
  j["id"] = conv.id;
  if (conv.user_rating) j["rating"] = *conv.user_rating;
  ordered_json turns = ordered_json::array();
  for (const auto& t : conv.turns) {
    ordered_json tj;
    tj["user"] = utterance_json(t.user);
    tj["chatbot"] = utterance_json(t.chatbot);
    turns.push_back(std::move(tj));
  }
  j["turns"] = std::move(turns);
  return j.dump();
}

std::vector<Conversation> parse_corpus_text(std::string_view text) {
  std::vector<Conversation> out;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Conversation conv = parse_conversation(line, line_no);
    if (!ids.insert(conv.id).second) throw CorpusError(line_no, "id", "duplicate id \"" + conv.id + "\"");
    out.push_back(std::move(conv));
  }
  return out;
}

std::vector<Conversation> parse_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot read corpus file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_corpus_text(buf.str());
}

std::string serialize_corpus(const std::vector<Conversation>& convs) {
  std::string out;
  for (const auto& c : convs) {
    out += serialize_conversation(c);
    out += '\n';
  }
  return out;
}

void write_corpus(const std::filesystem::path& path, const std::vector<Conversation>& convs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write corpus file: " + path.string());
  out << serialize_corpus(convs);
}

// ---------------------------------------------------------------------------

std::string_view to_string(Side s) {
  switch (s) {
    case Side::kUser: return "user";
    case Side::kChatbot: return "chatbot";
    case Side::kBoth: return "both";
  }
  return "?";
}

std::optional<Side> parse_side(std::string_view s) {
  if (s == "user") return Side::kUser;
  if (s == "chatbot") return Side::kChatbot;
  if (s == "both") return Side::kBoth;
  return std::nullopt;
}

CorpusSplits make_splits(const std::vector<Conversation>& convs, SplitRatios ratios,
                         std::uint64_t seed) {
  if (ratios.train <= 0 || ratios.dev <= 0 || ratios.test <= 0 ||
      std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must be positive and sum to 1");
  }
  const std::size_t n = convs.size();
  const auto n_train = static_cast<std::size_t>(std::llround(ratios.train * static_cast<double>(n)));
  const auto n_dev = static_cast<std::size_t>(std::llround(ratios.dev * static_cast<double>(n)));
  if (n_train == 0 || n_dev == 0 || n_train + n_dev >= n) {
    throw std::invalid_argument("too few conversations (" + std::to_string(n) +
                                ") for a three-way split");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<int> part(n, 2);
  for (std::size_t i = 0; i < n_train; ++i) part[order[i]] = 0;
  for (std::size_t i = n_train; i < n_train + n_dev; ++i) part[order[i]] = 1;

  CorpusSplits s;
  for (std::size_t i = 0; i < n; ++i) {
    (part[i] == 0 ? s.train : part[i] == 1 ? s.dev : s.test).push_back(convs[i]);
  }
  return s;
}

std::vector<ClassificationExample> build_examples(const Conversation& conv, LabelSpace target,
                                                  Side side, std::size_t context_window) {
  std::vector<ClassificationExample> out;
  for (std::size_t t = 0; t < conv.turns.size(); ++t) {
    const std::size_t first = t > context_window ? t - context_window : 0;
    for (const Utterance* u : {&conv.turns[t].user, &conv.turns[t].chatbot}) {
      if (side == Side::kUser && u->speaker != Speaker::kUser) continue;
      if (side == Side::kChatbot && u->speaker != Speaker::kChatbot) continue;
      std::size_t label = 0;
      if (target == LabelSpace::kTopic) {
        if (!u->topic) continue;
        label = index_of(*u->topic);
      } else {
        if (!u->dialog_act || *u->dialog_act == DialogAct::NotSet) continue;
        label = index_of(*u->dialog_act);
      }
      ClassificationExample ex;
      ex.tokens = tokenize(u->text);
      ex.label = label;
      ex.space = target;
      ex.context_turns.assign(conv.turns.begin() + static_cast<std::ptrdiff_t>(first),
                              conv.turns.begin() + static_cast<std::ptrdiff_t>(t));
      ex.gold_act = u->dialog_act;
      for (const auto& k : u->keyword_spans) ex.keyword_indices.push_back(k.token_index);
      std::sort(ex.keyword_indices.begin(), ex.keyword_indices.end());
      ex.keyword_indices.erase(std::unique(ex.keyword_indices.begin(), ex.keyword_indices.end()),
                               ex.keyword_indices.end());
      ex.conversation_id = conv.id;
      ex.turn_index = t;
      ex.speaker = u->speaker;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

std::vector<ClassificationExample> build_examples(const std::vector<Conversation>& convs,
                                                  LabelSpace target, Side side,
                                                  std::size_t context_window) {
  std::vector<ClassificationExample> out;
  for (const auto& c : convs) {
    auto ex = build_examples(c, target, side, context_window);
    std::move(ex.begin(), ex.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<ClassificationExample> downsample_class(const std::vector<ClassificationExample>& examples,
                                                    std::size_t label, double keep_ratio,
                                                    std::uint64_t seed) {
  if (!(keep_ratio > 0.0 && keep_ratio <= 1.0)) {
    throw std::invalid_argument("keep_ratio must lie in (0, 1]");
  }
  Rng rng(seed);
  std::vector<ClassificationExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    if (ex.label == label && !(rng.uniform() < keep_ratio)) continue;
    out.push_back(ex);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

namespace {

constexpr std::string_view kPlaceholder = "{kw}";

const std::vector<std::pair<Topic, std::vector<std::string>>>& builtin_lexicons() {
  static const std::vector<std::pair<Topic, std::vector<std::string>>> lex = {
      {Topic::Politics,
       {"election", "senate", "congress", "president", "democracy", "vote", "parliament", "policy"}},
      {Topic::Fashion,
       {"gucci", "dress", "jeans", "fashion", "handbag", "sneakers", "couture", "jacket"}},
      {Topic::Sports,
       {"yankees", "baseball", "football", "soccer", "tennis", "basketball", "olympics", "hockey"}},
      {Topic::ScienceAndTechnology,
       {"robots", "computers", "physics", "rocket", "software", "internet", "chemistry", "hal"}},
      {Topic::EntertainmentMusic,
       {"music", "guitar", "jazz", "concert", "album", "piano", "singer", "beatles"}},
      {Topic::EntertainmentMovies,
       {"movies", "actor", "cinema", "hollywood", "film", "director", "oscars", "starwars"}},
      {Topic::EntertainmentBooks,
       {"books", "novel", "author", "poetry", "library", "tolkien", "fiction", "shakespeare"}},
      {Topic::EntertainmentGeneral,
       {"puzzles", "games", "hobbies", "magic", "comedy", "festival", "circus", "trivia"}},
      {Topic::Phatic, {"hello", "hi", "hey", "greetings", "howdy", "goodbye", "bye", "cheers"}},
      {Topic::Interactive, {"riddle", "quiz", "joke", "story", "roleplay", "sing", "dance", "charades"}},
      {Topic::Other, {"weather", "cooking", "cars", "travel", "gardening", "pets", "food", "shopping"}},
      {Topic::InappropriateContent,
       {"insult", "curse", "swear", "rude", "offensive", "nasty", "vulgar", "slur"}},
  };
  return lex;
}

const std::vector<std::pair<DialogAct, std::vector<std::string>>>& builtin_templates() {
  static const std::vector<std::pair<DialogAct, std::vector<std::string>>> t = {
      {DialogAct::InformationRequest, {"what is {kw} ?", "do you know {kw} ?", "can you explain {kw} ?"}},
      {DialogAct::OpinionRequest, {"what do you think about {kw} ?", "do you like {kw} ?"}},
      {DialogAct::OpinionExpression, {"i like {kw}", "i think {kw} is great", "{kw} is awesome"}},
      {DialogAct::UserInstruction, {"tell me about {kw}", "let's talk about {kw}", "talk about {kw}"}},
  };
  return t;
}

const std::vector<std::string>& chatbot_templates() {
  static const std::vector<std::string> t = {"sure {kw} is a great subject",
                                             "i know a lot about {kw}",
                                             "{kw} is really interesting"};
  return t;
}

void validate(const SynthConfig& c) {
  if (!(c.anaphora_rate >= 0.0 && c.anaphora_rate <= 1.0)) {
    throw std::invalid_argument("anaphora_rate must lie in [0, 1]");
  }
  if (c.turns_per_conversation == 0) throw std::invalid_argument("turns_per_conversation must be > 0");
  if (c.lexicons.empty()) throw std::invalid_argument("no topic lexicons");
  std::set<std::string> seen;
  for (const auto& [topic, words] : c.lexicons) {
    if (words.empty()) {
      throw std::invalid_argument("empty lexicon for topic " + std::string(to_string(topic)));
    }
    for (const auto& w : words) {
      const auto toks = tokenize(w);
      if (toks.size() != 1 || toks[0] != w) {
        throw std::invalid_argument("lexicon word must be a single lowercase token: " + w);
      }
      if (!seen.insert(w).second) throw std::invalid_argument("lexicons not disjoint: " + w);
    }
  }
  if (c.act_templates.empty()) throw std::invalid_argument("no act templates");
  for (const auto& [act, templates] : c.act_templates) {
    if (templates.empty()) {
      throw std::invalid_argument("no templates for act " + std::string(to_string(act)));
    }
    for (const auto& t : templates) {
      const auto first = t.find(kPlaceholder);
      if (first == std::string::npos || t.find(kPlaceholder, first + 1) != std::string::npos) {
        throw std::invalid_argument("template must contain {kw} exactly once: " + t);
      }
    }
  }
}

struct Filled {
  std::string text;
  std::size_t keyword_index = 0;
};

Filled fill(const std::string& tmpl, const std::string& word) {
  const auto at = tmpl.find(kPlaceholder);
  Filled f;
  f.keyword_index = tokenize(std::string_view(tmpl).substr(0, at)).size();
  f.text = tmpl.substr(0, at) + word + tmpl.substr(at + kPlaceholder.size());
  return f;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[static_cast<std::size_t>(rng.below(v.size()))];
}

}  // namespace

SynthConfig default_synth_config(std::size_t n_topics) {
  if (n_topics < 1 || n_topics > kNumTopics) throw std::invalid_argument("n_topics must be in 1..12");
  SynthConfig c;
  c.lexicons.assign(builtin_lexicons().begin(),
                    builtin_lexicons().begin() + static_cast<std::ptrdiff_t>(n_topics));
  c.act_templates = builtin_templates();
  return c;
}

bool is_anaphoric_filler(std::string_view text) {
  return std::find(kAnaphoricFillers.begin(), kAnaphoricFillers.end(), text) !=
         kAnaphoricFillers.end();
}

std::vector<Conversation> generate_synthetic(const SynthConfig& config) {
  validate(config);
  Rng rng(config.seed);
  std::vector<Conversation> out;
  out.reserve(config.n_conversations);
  for (std::size_t n = 0; n < config.n_conversations; ++n) {
    Conversation conv;
    char id[32];
    std::snprintf(id, sizeof id, "synth-%06zu", n);
    conv.id = id;
    conv.user_rating = static_cast<double>(1 + rng.below(5));

    Topic prev_topic = Topic::Other;
    DialogAct prev_act = DialogAct::Other;
    for (std::size_t t = 0; t < config.turns_per_conversation; ++t) {
      Turn turn;
      const bool anaphoric = t > 0 && rng.bernoulli(config.anaphora_rate);
      Topic topic;
      if (anaphoric) {
        const std::string_view filler = kAnaphoricFillers[rng.below(kAnaphoricFillers.size())];
        topic = prev_topic;
        turn.user.text = std::string(filler);
        turn.user.dialog_act = filler == "yes"            ? prev_act
                               : filler == "tell me more" ? DialogAct::UserInstruction
                                                          : DialogAct::InformationRequest;
      } else {
        const auto& [lex_topic, words] = pick(config.lexicons, rng);
        topic = lex_topic;
        const std::string& word = pick(words, rng);
        const auto& [act, templates] = pick(config.act_templates, rng);
        Filled f = fill(pick(templates, rng), word);
        turn.user.text = std::move(f.text);
        turn.user.dialog_act = act;
        turn.user.keyword_spans.push_back({f.keyword_index, topic});
      }
      turn.user.topic = topic;

      const auto& words = std::find_if(config.lexicons.begin(), config.lexicons.end(),
                                       [&](const auto& e) { return e.first == topic; })
                              ->second;
      Filled reply = fill(pick(chatbot_templates(), rng), pick(words, rng));
      turn.chatbot.text = std::move(reply.text);
      turn.chatbot.topic = topic;
      turn.chatbot.dialog_act = DialogAct::InformationDelivery;
      turn.chatbot.keyword_spans.push_back({reply.keyword_index, topic});
      ResponseRatings r;
      r.comprehensible = static_cast<int>(rng.below(2));
      r.relevant = static_cast<int>(rng.below(2));
      r.interesting = static_cast<int>(rng.below(2));
      r.continue_conversation = static_cast<int>(rng.below(2));
      turn.chatbot.ratings = r;

      prev_topic = topic;
      prev_act = *turn.user.dialog_act;
      conv.turns.push_back(std::move(turn));
    }
    out.push_back(std::move(conv));
  }
  return out;
}

// ---------------------------------------------------------------------------
// SynthConfig files

SynthConfig parse_synth_config(std::string_view json_text) {
  Reader rd{0};
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    rd.fail("<config>", std::string("invalid syntax: ") + e.what());
  }
  rd.only_fields(root, "", {"seed", "n_conversations", "turns_per_conversation", "anaphora_rate",
                            "lexicons", "act_templates"});
  SynthConfig c = default_synth_config(8);
  auto unsigned_field = [&](const char* key, auto& dst) {
    if (auto it = root.find(key); it != root.end()) {
      if (!it->is_number_unsigned()) rd.fail(key, "expected a non-negative integer");
      dst = it->get<std::remove_reference_t<decltype(dst)>>();
    }
  };
  unsigned_field("seed", c.seed);
  unsigned_field("n_conversations", c.n_conversations);
  unsigned_field("turns_per_conversation", c.turns_per_conversation);
  if (auto it = root.find("anaphora_rate"); it != root.end()) {
    if (!it->is_number()) rd.fail("anaphora_rate", "expected a number");
    c.anaphora_rate = it->get<double>();
  }
  if (auto it = root.find("lexicons"); it != root.end()) {
    if (!it->is_object()) rd.fail("lexicons", "expected an object of topic -> words");
    c.lexicons.clear();
    for (auto e = it->begin(); e != it->end(); ++e) {
      const std::string field = "lexicons." + e.key();
      const Topic t = rd.topic(json(e.key()), field);
      if (!e->is_array()) rd.fail(field, "expected an array of words");
      c.lexicons.emplace_back(t, e->get<std::vector<std::string>>());
    }
  }
  if (auto it = root.find("act_templates"); it != root.end()) {
    if (!it->is_object()) rd.fail("act_templates", "expected an object of act -> templates");
    c.act_templates.clear();
    for (auto e = it->begin(); e != it->end(); ++e) {
      const std::string field = "act_templates." + e.key();
      const DialogAct a = rd.act(json(e.key()), field);
      if (!e->is_array()) rd.fail(field, "expected an array of templates");
      c.act_templates.emplace_back(a, e->get<std::vector<std::string>>());
    }
  }
  // Objects are key-sorted on parse; keep a canonical label order.
  std::sort(c.lexicons.begin(), c.lexicons.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::sort(c.act_templates.begin(), c.act_templates.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return c;
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot read synth config: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_synth_config(buf.str());
}

std::string serialize_synth_config(const SynthConfig& config) {
  ordered_json j;
  j["seed"] = config.seed;
  j["n_conversations"] = config.n_conversations;
  j["turns_per_conversation"] = config.turns_per_conversation;
  j["anaphora_rate"] = config.anaphora_rate;
  ordered_json lex = ordered_json::object();
  for (const auto& [t, words] : config.lexicons) lex[std::string(to_string(t))] = words;
  j["lexicons"] = std::move(lex);
  ordered_json tmpl = ordered_json::object();
  for (const auto& [a, ts] : config.act_templates) tmpl[std::string(to_string(a))] = ts;
  j["act_templates"] = std::move(tmpl);
  return j.dump(2);
}

}  // namespace convtopic
