#ifndef RESTCHECK_DATAGEN_H_
#define RESTCHECK_DATAGEN_H_

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "restcheck/json_util.h"
#include "restcheck/rng.h"
#include "restcheck/spec_model.h"

namespace restcheck {

// Named realistic-value generators, addressed by dotted paths such as
// "name.first-name".
class GeneratorRegistry {
 public:
  using Generator = std::function<Json(Rng&)>;

  // name.first-name, name.last-name, internet.email, phone.number
  static const GeneratorRegistry& builtin();

  void add(std::string path, Generator generator);
  bool contains(std::string_view path) const;
  std::vector<std::string> names() const;
  // Throws GenerationError for an unknown path.
  Json generate(std::string_view path, Rng& rng) const;

 private:
  std::map<std::string, Generator, std::less<>> generators_;
};

// A named generator, when present, takes precedence over every constraint on
// the field. Otherwise integers are uniform on [min, max] and strings are
// sampled from `pattern` (or lowercase letters) within the size bounds.
Json generate_field(const FieldSpec& field, Rng& rng,
                    const GeneratorRegistry& registry = GeneratorRegistry::builtin());

// Object with exactly the resource's fields; the id field is never generated.
Json generate_object(const ResourceSpec& resource, Rng& rng,
                     const GeneratorRegistry& registry = GeneratorRegistry::builtin());

// Fields where a generator shadows declared constraints, one message each.
std::vector<std::string> generator_precedence_warnings(const ServiceSpec& spec);

}  // namespace restcheck

#endif  // RESTCHECK_DATAGEN_H_
