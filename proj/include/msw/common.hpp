#ifndef MSW_COMMON_HPP
#define MSW_COMMON_HPP

#include <array>
#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace msw {

// Horizon and fleet caps. Controls are 2 scalars per step, so the tangent
// capacity must cover 2 * kMaxHorizon for full-plan derivatives.
inline constexpr int kMaxHorizon = 8;
inline constexpr int kMaxOthers = 4;
inline constexpr int kTangentCap = 2 * kMaxHorizon;

inline constexpr double kCarLength = 4.0;
inline constexpr double kCarWidth = 2.0;

enum class Errc {
    invalid_argument,
    bad_config,
    runtime,
    io,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

// Fixed-capacity vector. Everything in the hot planning loops lives on the
// stack; N is a hard cap, size is runtime.
template <class T, int N>
class SmallVec {
public:
    SmallVec() = default;
    SmallVec(int n, const T& value) { assign(n, value); }

    void assign(int n, const T& value) {
        assert(n >= 0 && n <= N);
        size_ = n;
        for (int i = 0; i < n; ++i) data_[i] = value;
    }
    void push_back(const T& value) {
        assert(size_ < N);
        data_[size_++] = value;
    }
    void resize(int n) {
        assert(n >= 0 && n <= N);
        for (int i = size_; i < n; ++i) data_[i] = T{};
        size_ = n;
    }
    void clear() { size_ = 0; }

    T& operator[](int i) {
        assert(i >= 0 && i < size_);
        return data_[i];
    }
    const T& operator[](int i) const {
        assert(i >= 0 && i < size_);
        return data_[i];
    }
    T& back() { return (*this)[size_ - 1]; }
    const T& back() const { return (*this)[size_ - 1]; }

    int size() const { return size_; }
    bool empty() const { return size_ == 0; }
    static constexpr int capacity() { return N; }

    T* begin() { return data_.data(); }
    T* end() { return data_.data() + size_; }
    const T* begin() const { return data_.data(); }
    const T* end() const { return data_.data() + size_; }
    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

private:
    std::array<T, N> data_{};
    int size_ = 0;
};

}  // namespace msw

#endif  // MSW_COMMON_HPP
