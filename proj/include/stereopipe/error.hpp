/*
Copyright 2026 The stereopipe Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#ifndef STEREOPIPE_ERROR_HPP
#define STEREOPIPE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace stereopipe {

enum class ErrorCode {
	InvalidArgument,
	Range,
	DimensionMismatch,
	BadMagic,
	DimOverflow,
	Truncated,
	BadHeader,
	Io,
	Numeric,
	Degenerate,
};

const char *error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
	Error(ErrorCode code, const std::string &what)
		: std::runtime_error(what), m_code(code) {}

	ErrorCode code() const noexcept { return m_code; }

private:
	ErrorCode m_code;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &what)
{
	throw Error(code, what);
}

}

#endif
