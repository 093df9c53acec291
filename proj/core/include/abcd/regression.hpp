#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace abcd {

// Named regressor matrix. The intercept (all-ones column named "const") goes
// first unless the caller suppresses it.
struct DesignMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd values;  // n x k

    explicit DesignMatrix(Eigen::Index n) : values(n, 0) {}

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index k() const { return values.cols(); }

    void add_intercept();
    void add(const std::string& name, const Eigen::VectorXd& column);
    void add(const std::string& name, const std::vector<double>& column);

    static DesignMatrix with_intercept(Eigen::Index n);
};

enum class StandardErrors { Classical, HC1 };

struct RegressionFit {
    std::vector<std::string> names;
    Eigen::VectorXd coef;
    Eigen::VectorXd std_error;
    Eigen::VectorXd t_value;
    Eigen::VectorXd p_value;
    double rss = 0.0;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    long df_resid = 0;
    long n = 0;

    double sigma2() const { return rss / static_cast<double>(df_resid); }

    int index(const std::string& name) const;  // -1 when absent
    double coef_of(const std::string& name) const;
    double se_of(const std::string& name) const;
    double p_of(const std::string& name) const;
};

// Least squares via Householder QR with column pivoting; rank decided at a
// relative tolerance of 1e-10 against the largest pivot. Classical SEs are
// sigma^2 diag((X'X)^-1) with sigma^2 = RSS/(n-k); HC1 is offered but never
// the default.
RegressionFit ols_fit(const DesignMatrix& X, const Eigen::VectorXd& y,
                      StandardErrors se = StandardErrors::Classical);

// F test for nested models: F = ((RSS_r - RSS_f)/q) / (RSS_f / df_f).
struct FTest {
    double f = 0.0;
    double p = 1.0;
};
FTest f_test_nested(const RegressionFit& full, const RegressionFit& restricted, int q);

// Internals reused by the IV module (coefficients plus (X'X)^-1 from the
// same decomposition).
struct OlsCore {
    Eigen::VectorXd coef;
    Eigen::MatrixXd xtx_inv;
    Eigen::VectorXd residuals;
    double rss = 0.0;
};
OlsCore ols_core(const DesignMatrix& X, const Eigen::VectorXd& y);

}  // namespace abcd
