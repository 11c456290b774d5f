/*
   Copyright 2026 The invlab Authors

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

#pragma once

#include <stdexcept>
#include <string>

namespace invlab {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Configuration-class errors (CLI exit code 2).
class ConfigurationError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public ConfigurationError {
public:
    using ConfigurationError::ConfigurationError;
};

class ValidationError : public ConfigurationError {
public:
    using ConfigurationError::ConfigurationError;
};

class UnsupportedDimensionError : public ConfigurationError {
public:
    using ConfigurationError::ConfigurationError;
};

class ConstructionError : public ConfigurationError {
public:
    using ConfigurationError::ConfigurationError;
};

class FormatError : public ConfigurationError {
public:
    using ConfigurationError::ConfigurationError;
};

// Numeric-class errors (CLI exit code 3).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Field content reaches modes the grid cannot treat exactly. The message
/// names the grid size that would be required.
class ResolutionError : public NumericError {
public:
    using NumericError::NumericError;
};

class DivergenceError : public NumericError {
public:
    using NumericError::NumericError;
};

class QuadratureError : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace invlab
