fn main() {
    // Link the system OpenBLAS (provides BLAS, CBLAS and LAPACK symbols);
    // ndarray-linalg is used without a bundled backend.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
