//! Library values against independently computed reference values.

mod common;

macro_rules! oracle_tests {
    ($($name:ident),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                if let Err(msg) = common::$name() {
                    panic!("{msg}");
                }
            }
        )*
    };
}

oracle_tests!(
    phenotype_additivity,
    gaussian_kernel,
    mutation_moments,
    ibm_rates,
    mendelian,
    logistic,
    dimorphic_rhs,
    third_eigenvalue,
    neutral_flow,
    neutral_eigen,
    zero_roots,
    jump_density,
    jump_rates,
    step_law,
    singular_ecological,
    m1,
    gradient_regression,
    canonical_rates,
    chain_rule,
    extinction,
    wilson,
    neutral_invasion,
);
