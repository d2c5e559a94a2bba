#include "pbit/csv.hpp"

#include <cinttypes>
#include <cstdio>

namespace pbit {

CsvWriter::CsvWriter(std::ostream &out, std::string_view schema_id,
                     std::uint64_t config_hash, std::uint64_t seed)
    : out_(out)
{
	char line[128];
	std::snprintf(line, sizeof(line),
	              "# schema=%.*s config=%016" PRIx64 " seed=%" PRIu64,
	              static_cast<int>(schema_id.size()), schema_id.data(),
	              config_hash, seed);
	out_ << line << '\n';
}

void CsvWriter::comment(std::string_view text)
{
	out_ << "# " << text << '\n';
}

void CsvWriter::columns(std::initializer_list<std::string_view> names)
{
	bool first = true;
	for (auto name : names) {
		if (!first) {
			out_ << ',';
		}
		out_ << name;
		first = false;
	}
	out_ << '\n';
}

void CsvWriter::separator()
{
	if (row_open_) {
		out_ << ',';
	}
	row_open_ = true;
}

CsvWriter &CsvWriter::cell(double value)
{
	separator();
	out_ << fmt(value);
	return *this;
}

CsvWriter &CsvWriter::cell(int value)
{
	separator();
	out_ << value;
	return *this;
}

CsvWriter &CsvWriter::cell(std::size_t value)
{
	separator();
	out_ << value;
	return *this;
}

CsvWriter &CsvWriter::cell(std::string_view value)
{
	separator();
	out_ << value;
	return *this;
}

void CsvWriter::end_row()
{
	out_ << '\n';
	row_open_ = false;
}

std::string CsvWriter::fmt(double value)
{
	char buf[40];
	std::snprintf(buf, sizeof(buf), "%.10g", value);
	return buf;
}

}  // namespace pbit
