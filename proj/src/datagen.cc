#include "restcheck/datagen.h"

#include <algorithm>
#include <array>
#include <cctype>

#include "restcheck/error.h"
#include "restcheck/pattern.h"

namespace restcheck {

namespace {

constexpr std::array kFirstNames = {
    "Brycen", "Sasha",  "Grayce", "Adam",   "Claudine", "Marques", "Ana",
    "Carla",  "Nuno",   "Sara",   "Helena", "Tomas",    "Ines",    "Rui",
    "Joana",  "Miguel", "Beatriz", "Pedro", "Lucia",    "Diogo",   "Marta",
    "Kyle",   "Elena",  "Oscar",  "Priya",  "Yusuf",    "Mei",     "Noah",
    "Amara",  "Felix",  "Ivy",    "Jonas",  "Leila",    "Mateo",   "Nora",
    "Omar",   "Paula",  "Quinn",  "Rosa",   "Stefan"};

constexpr std::array kLastNames = {
    "Cummerata", "Hyatt",   "Brekke",  "Prosacco", "Rodriguez", "Prince",
    "Simoes",    "Ribeiro", "Ferreira", "Silva",   "Santos",    "Costa",
    "Oliveira",  "Pereira", "Almeida", "Carvalho", "Gomes",     "Martins",
    "Lopes",     "Sousa",   "Fernandes", "Goncalves", "Marques", "Rocha",
    "Kingsbury", "Nakamura", "Okafor", "Schmidt",  "Moreau",    "Novak",
    "Larsen",    "Haddad",  "Kowalski", "Ivanova", "Becker",    "Duarte"};

constexpr std::array kEmailDomains = {"hotmail.com", "yahoo.com", "gmail.com",
                                      "example.org", "mail.pt",   "outlook.com"};

template <std::size_t N>
std::string pick(const std::array<const char*, N>& words, Rng& rng) {
  return words[rng.index(N)];
}

std::string lowercase(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return text;
}

std::string digits(Rng& rng, int count) {
  std::string out;
  for (int i = 0; i < count; ++i) out.push_back(static_cast<char>('0' + rng.index(10)));
  return out;
}

GeneratorRegistry make_builtin() {
  GeneratorRegistry registry;
  registry.add("name.first-name", [](Rng& rng) { return Json(pick(kFirstNames, rng)); });
  registry.add("name.last-name", [](Rng& rng) { return Json(pick(kLastNames, rng)); });
  registry.add("internet.email", [](Rng& rng) {
    const std::string first = lowercase(pick(kFirstNames, rng));
    const std::string last = lowercase(pick(kLastNames, rng));
    return Json(first + "." + last + "@" + pick(kEmailDomains, rng));
  });
  registry.add("phone.number", [](Rng& rng) {
    std::string area = digits(rng, 3);
    area[0] = static_cast<char>('1' + rng.index(9));
    return Json(area + "-" + digits(rng, 3) + "-" + digits(rng, 4));
  });
  return registry;
}

std::int64_t integer_low(const FieldSpec& field) {
  if (field.min) return *field.min;
  if (field.max) return *field.max - 1000;
  return 0;
}

std::int64_t integer_high(const FieldSpec& field) {
  if (field.max) return *field.max;
  if (field.min) return *field.min + 1000;
  return 1000;
}

std::optional<std::size_t> as_size(const std::optional<std::int64_t>& v) {
  if (!v) return std::nullopt;
  return static_cast<std::size_t>(std::max<std::int64_t>(0, *v));
}

std::string plain_string(const FieldSpec& field, Rng& rng) {
  std::int64_t lo = field.size_min.value_or(1);
  std::int64_t hi = field.size_max.value_or(std::max<std::int64_t>(lo, 1) + 11);
  if (!field.size_min && field.size_max) lo = std::min<std::int64_t>(1, hi);
  if (lo > hi) {
    throw GenerationError("size bounds of '" + field.name + "' are unsatisfiable");
  }
  const auto length = rng.uniform_int(lo, hi);
  std::string out;
  for (std::int64_t i = 0; i < length; ++i) out.push_back(static_cast<char>('a' + rng.index(26)));
  return out;
}

}  // namespace

const GeneratorRegistry& GeneratorRegistry::builtin() {
  static const GeneratorRegistry registry = make_builtin();
  return registry;
}

void GeneratorRegistry::add(std::string path, Generator generator) {
  generators_[std::move(path)] = std::move(generator);
}

bool GeneratorRegistry::contains(std::string_view path) const {
  return generators_.find(path) != generators_.end();
}

std::vector<std::string> GeneratorRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : generators_) out.push_back(name);
  return out;
}

Json GeneratorRegistry::generate(std::string_view path, Rng& rng) const {
  const auto it = generators_.find(path);
  if (it == generators_.end()) {
    throw GenerationError("unknown generator '" + std::string(path) + "'");
  }
  return it->second(rng);
}

Json generate_field(const FieldSpec& field, Rng& rng, const GeneratorRegistry& registry) {
  if (field.generator) return registry.generate(*field.generator, rng);
  switch (field.kind) {
    case FieldKind::kBoolean:
      return Json(rng.bernoulli(0.5));
    case FieldKind::kInteger: {
      const std::int64_t lo = integer_low(field);
      const std::int64_t hi = integer_high(field);
      if (lo > hi) throw GenerationError("min exceeds max for '" + field.name + "'");
      return Json(rng.uniform_int(lo, hi));
    }
    case FieldKind::kString:
      if (field.pattern) {
        return Json(Pattern::parse(*field.pattern)
                        .sample(rng, as_size(field.size_min), as_size(field.size_max)));
      }
      return Json(plain_string(field, rng));
  }
  return Json();
}

Json generate_object(const ResourceSpec& resource, Rng& rng,
                     const GeneratorRegistry& registry) {
  Json object = Json::object();
  for (const auto& field : resource.fields) {
    object[field.name] = generate_field(field, rng, registry);
  }
  return object;
}

std::vector<std::string> generator_precedence_warnings(const ServiceSpec& spec) {
  std::vector<std::string> out;
  for (const auto& resource : spec.resources) {
    for (const auto& field : resource.fields) {
      if (field.generator && field.has_constraints()) {
        out.push_back("warning: " + resource.name + "." + field.name + " uses generator '" +
                      *field.generator +
                      "'; its declared constraints are not applied to generated values");
      }
    }
  }
  return out;
}

}  // namespace restcheck
