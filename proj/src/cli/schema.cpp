#include "oamlens/cli.hpp"

#include "oamlens/schema_embed.hpp"

#include <cmath>
#include <sstream>

namespace oamlens::cli
{

namespace
{

std::string escape_token(const std::string& key)
{
  std::string out;
  for (char c : key)
  {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

bool has_type(const Json& value, const std::string& type)
{
  if (type == "object")
    return value.is_object();
  if (type == "array")
    return value.is_array();
  if (type == "string")
    return value.is_string();
  if (type == "boolean")
    return value.is_boolean();
  if (type == "null")
    return value.is_null();
  if (type == "number")
    return value.is_number();
  if (type == "integer")
  {
    if (value.is_number_integer())
      return true;
    if (value.is_number_float())
    {
      const double v = value.get<double>();
      return std::isfinite(v) && v == std::floor(v);
    }
    return false;
  }
  return false;
}

class Validator
{
public:
  explicit Validator(const Json& root) : root_(root) {}

  void check(const Json& value, const Json& schema, const std::string& path)
  {
    if (schema.contains("$ref"))
    {
      check(value, resolve(schema["$ref"].get<std::string>()), path);
      return;
    }
    if (schema.contains("type"))
    {
      const Json& t = schema["type"];
      bool ok = false;
      if (t.is_string())
        ok = has_type(value, t.get<std::string>());
      else
        for (const auto& alt : t)
          ok = ok || has_type(value, alt.get<std::string>());
      if (!ok)
      {
        issue(path, "expected type " + (t.is_string() ? t.get<std::string>() : t.dump()) +
                        ", got " + value.type_name());
        return;
      }
    }
    if (schema.contains("enum"))
    {
      bool found = false;
      for (const auto& option : schema["enum"])
        found = found || option == value;
      if (!found)
        issue(path, "value " + value.dump() + " not in " + schema["enum"].dump());
    }
    if (value.is_number())
    {
      const double v = value.get<double>();
      if (schema.contains("minimum") && v < schema["minimum"].get<double>())
        issue(path, "must be >= " + schema["minimum"].dump());
      if (schema.contains("maximum") && v > schema["maximum"].get<double>())
        issue(path, "must be <= " + schema["maximum"].dump());
      if (schema.contains("exclusiveMinimum") && !(v > schema["exclusiveMinimum"].get<double>()))
        issue(path, "must be > " + schema["exclusiveMinimum"].dump());
    }
    if (value.is_object())
    {
      if (schema.contains("required"))
        for (const auto& key : schema["required"])
          if (!value.contains(key.get<std::string>()))
            issue(path + "/" + escape_token(key.get<std::string>()), "required field missing");
      const Json* props = schema.contains("properties") ? &schema["properties"] : nullptr;
      const bool closed =
          schema.contains("additionalProperties") && schema["additionalProperties"] == false;
      for (const auto& [key, child] : value.items())
      {
        const std::string child_path = path + "/" + escape_token(key);
        if (props && props->contains(key))
          check(child, (*props)[key], child_path);
        else if (closed)
          issue(child_path, "unknown field");
      }
    }
    if (value.is_array())
    {
      if (schema.contains("minItems") && value.size() < schema["minItems"].get<std::size_t>())
        issue(path, "needs at least " + schema["minItems"].dump() + " items");
      if (schema.contains("items"))
        for (std::size_t i = 0; i < value.size(); ++i)
          check(value[i], schema["items"], path + "/" + std::to_string(i));
    }
  }

  std::vector<SchemaIssue> issues;

private:
  const Json& resolve(const std::string& ref)
  {
    if (ref.rfind("#/", 0) != 0)
      throw std::invalid_argument("schema: only local $ref is supported: " + ref);
    return root_.at(Json::json_pointer(ref.substr(1)));
  }

  void issue(const std::string& path, std::string message)
  {
    issues.push_back({path, std::move(message)});
  }

  const Json& root_;
};

} // namespace

const Json& experiment_schema()
{
  static const Json schema = Json::parse(embedded::experiment_schema);
  return schema;
}

std::vector<SchemaIssue> validate(const Json& doc, const Json& schema)
{
  Validator v(schema);
  v.check(doc, schema, "");
  return std::move(v.issues);
}

} // namespace oamlens::cli
