#pragma once

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace pbit {

// CSV emitter with a versioned schema header. Output is byte-deterministic:
// doubles are printed with a fixed %.10g format, so identical inputs give
// identical files.
class CsvWriter {
public:
	CsvWriter(std::ostream &out, std::string_view schema_id,
	          std::uint64_t config_hash, std::uint64_t seed);

	void comment(std::string_view text);
	void columns(std::initializer_list<std::string_view> names);

	CsvWriter &cell(double value);
	CsvWriter &cell(int value);
	CsvWriter &cell(std::size_t value);
	CsvWriter &cell(std::string_view value);
	void end_row();

	static std::string fmt(double value);

private:
	std::ostream &out_;
	bool row_open_ = false;

	void separator();
};

}  // namespace pbit
