#include "volterra/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "volterra/cli/io.hpp"

namespace volterra::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  if (trim(value).empty()) return out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::InvalidArgument, "config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw Error(ErrorKind::InvalidArgument, "config key '" + key + "': expected true/false");
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    if constexpr (std::is_same_v<T, double>) {
      out += format_double(values[i]);
    } else if constexpr (std::is_same_v<T, std::string>) {
      out += values[i];
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) {
    if constexpr (std::is_same_v<T, std::string>) {
      out.push_back(item);
    } else {
      out.push_back(parse_number<T>(key, item));
    }
  }
  return out;
}

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define VOLTERRA_STRING_FIELD(name)                                  \
  Field {                                                            \
    #name, [](const RunConfig& c) { return c.name; },                \
        [](RunConfig& c, const std::string& v) { c.name = v; }       \
  }
#define VOLTERRA_NUMBER_FIELD(name, type)                                       \
  Field {                                                                       \
    #name,                                                                      \
        [](const RunConfig& c) {                                                \
          if constexpr (std::is_same_v<type, double>) return format_double(c.name); \
          else return std::to_string(c.name);                                   \
        },                                                                      \
        [](RunConfig& c, const std::string& v) { c.name = parse_number<type>(#name, v); } \
  }
#define VOLTERRA_LIST_FIELD(name, type)                                            \
  Field {                                                                          \
    #name, [](const RunConfig& c) { return join(c.name); },                        \
        [](RunConfig& c, const std::string& v) { c.name = parse_list<type>(#name, v); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      VOLTERRA_STRING_FIELD(command),
      VOLTERRA_STRING_FIELD(input),
      VOLTERRA_STRING_FIELD(input2),
      VOLTERRA_STRING_FIELD(out),
      VOLTERRA_STRING_FIELD(data_dir),
      VOLTERRA_STRING_FIELD(target),
      VOLTERRA_NUMBER_FIELD(memory, int),
      VOLTERRA_NUMBER_FIELD(order, int),
      VOLTERRA_NUMBER_FIELD(lambda, double),
      VOLTERRA_STRING_FIELD(kernel),
      VOLTERRA_NUMBER_FIELD(sigma, double),
      Field{"prescale", [](const RunConfig& c) { return std::string(c.prescale ? "true" : "false"); },
            [](RunConfig& c, const std::string& v) { c.prescale = parse_bool("prescale", v); }},
      VOLTERRA_NUMBER_FIELD(folds, int),
      VOLTERRA_NUMBER_FIELD(train_fraction, double),
      VOLTERRA_LIST_FIELD(lambdas, double),
      VOLTERRA_LIST_FIELD(memories, int),
      VOLTERRA_LIST_FIELD(orders, int),
      VOLTERRA_NUMBER_FIELD(seed, std::uint64_t),
      VOLTERRA_NUMBER_FIELD(runs, int),
      VOLTERRA_NUMBER_FIELD(length, std::size_t),
      VOLTERRA_LIST_FIELD(processes, std::string),
      VOLTERRA_STRING_FIELD(transform),
      VOLTERRA_NUMBER_FIELD(family_size, int),
  };
  return table;
}

#undef VOLTERRA_STRING_FIELD
#undef VOLTERRA_NUMBER_FIELD
#undef VOLTERRA_LIST_FIELD

}  // namespace

KernelSpec RunConfig::kernel_spec() const {
  switch (parse_kernel_family(kernel)) {
    case KernelFamily::SumPolynomial: return KernelSpec::sum_polynomial(order);
    case KernelFamily::InhomogeneousPolynomial: return KernelSpec::inhomogeneous(order);
    case KernelFamily::Exponential: return KernelSpec::exponential();
    case KernelFamily::Gaussian: return KernelSpec::gaussian(sigma);
  }
  return KernelSpec::sum_polynomial(order);
}

ErrorTransform RunConfig::error_transform() const { return parse_error_transform(transform); }

SearchGrid RunConfig::grid() const {
  SearchGrid g = SearchGrid::defaults();
  if (!lambdas.empty()) g.lambdas = lambdas;
  if (!memories.empty()) g.memories = memories;
  if (!orders.empty()) g.orders = orders;
  g.folds = folds;
  g.train_fraction = train_fraction;
  return g;
}

void RunConfig::validate() const {
  ModelConfig{memory, order, lambda}.validate();
  kernel_spec().validate();
  error_transform();
  grid().validate();
  if (runs < 1) throw Error(ErrorKind::InvalidArgument, "runs must be >= 1");
  if (length < 2) throw Error(ErrorKind::InvalidArgument, "length must be >= 2");
  if (family_size < 0) throw Error(ErrorKind::InvalidFamilySize, "family size must be >= 0");
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const auto& field : fields()) {
    out += field.key;
    out += " = ";
    out += field.get(config);
    out += '\n';
  }
  return out;
}

RunConfig from_text(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidArgument,
                  "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    bool known = false;
    for (const auto& field : fields()) {
      if (key == field.key) {
        field.set(config, value);
        known = true;
        break;
      }
    }
    if (!known) {
      throw Error(ErrorKind::InvalidArgument,
                  "config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str());
}

void save_config(const RunConfig& config, const std::string& path) {
  write_atomic(path, to_text(config));
}

}  // namespace volterra::cli
