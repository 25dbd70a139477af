#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <mutex>
#include <vector>

namespace qcbadc::detail {

// FFTW's planner is not thread-safe; plan creation/destruction is serialized.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Real <-> half-complex FFT of a fixed power-of-two length.
class RealFft {
  public:
    explicit RealFft(std::size_t length) : length_(length) {
        in_ = fftw_alloc_real(length_);
        out_ = fftw_alloc_complex(length_ / 2 + 1);
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(length_), in_, out_, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r_1d(static_cast<int>(length_), out_, in_, FFTW_ESTIMATE);
    }
    ~RealFft() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(in_);
        fftw_free(out_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t length() const { return length_; }
    std::size_t bins() const { return length_ / 2 + 1; }

    /// time (length() reals) -> spectrum (bins() complex)
    void forward(const std::vector<double>& time, std::vector<std::complex<double>>& spec) {
        std::memcpy(in_, time.data(), length_ * sizeof(double));
        fftw_execute(fwd_);
        spec.resize(bins());
        std::memcpy(spec.data(), out_, bins() * sizeof(std::complex<double>));
    }

    /// spectrum -> time, including the 1/length normalization
    void inverse(const std::vector<std::complex<double>>& spec, std::vector<double>& time) {
        std::memcpy(out_, spec.data(), bins() * sizeof(std::complex<double>));
        fftw_execute(inv_);
        time.resize(length_);
        const double scale = 1.0 / static_cast<double>(length_);
        for (std::size_t i = 0; i < length_; ++i) time[i] = in_[i] * scale;
    }

  private:
    std::size_t length_;
    double* in_;
    fftw_complex* out_;
    fftw_plan fwd_;
    fftw_plan inv_;
};

/// Complex in-place FFT (forward and inverse) of fixed length.
class ComplexFft {
  public:
    explicit ComplexFft(std::size_t length) : length_(length) {
        buf_ = fftw_alloc_complex(length_);
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fwd_ = fftw_plan_dft_1d(static_cast<int>(length_), buf_, buf_, FFTW_FORWARD,
                                FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_1d(static_cast<int>(length_), buf_, buf_, FFTW_BACKWARD,
                                FFTW_ESTIMATE);
    }
    ~ComplexFft() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(buf_);
    }
    ComplexFft(const ComplexFft&) = delete;
    ComplexFft& operator=(const ComplexFft&) = delete;

    std::size_t length() const { return length_; }

    void forward(const std::complex<double>* in, std::complex<double>* out) {
        std::memcpy(buf_, in, length_ * sizeof(std::complex<double>));
        fftw_execute(fwd_);
        std::memcpy(out, buf_, length_ * sizeof(std::complex<double>));
    }

    /// Zero-pads the input up to the transform length.
    std::vector<std::complex<double>> forward(const std::vector<std::complex<double>>& in) {
        std::memcpy(buf_, in.data(), in.size() * sizeof(std::complex<double>));
        std::memset(buf_ + in.size(), 0,
                    (length_ - in.size()) * sizeof(std::complex<double>));
        fftw_execute(fwd_);
        std::vector<std::complex<double>> out(length_);
        std::memcpy(out.data(), buf_, length_ * sizeof(std::complex<double>));
        return out;
    }

    /// Includes the 1/length normalization.
    std::vector<std::complex<double>> inverse(const std::vector<std::complex<double>>& in) {
        std::memcpy(buf_, in.data(), length_ * sizeof(std::complex<double>));
        fftw_execute(inv_);
        std::vector<std::complex<double>> out(length_);
        const double scale = 1.0 / static_cast<double>(length_);
        const auto* b = reinterpret_cast<const std::complex<double>*>(buf_);
        for (std::size_t i = 0; i < length_; ++i) out[i] = b[i] * scale;
        return out;
    }

  private:
    std::size_t length_;
    fftw_complex* buf_;
    fftw_plan fwd_;
    fftw_plan inv_;
};

inline std::size_t next_pow2(std::size_t v) {
    std::size_t p = 1;
    while (p < v) p <<= 1;
    return p;
}

}  // namespace qcbadc::detail
