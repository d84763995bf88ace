use std::ffi::{CStr, CString};
use std::ptr;

use diffmap_ffi::*;

fn last_error() -> String {
    let p = dm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

/// Two far-apart pairs joined by one weak bridge when k = 1 would split
/// them; k = 2 keeps the graph connected.
fn sample_rows() -> Vec<f64> {
    vec![
        0.0, 0.0, //
        1.0, 0.1, //
        2.0, 0.3, //
        3.0, 0.2, //
        4.0, 0.5, //
        5.0, 0.4,
    ]
}

#[test]
fn embed_round_trip() {
    let rows = sample_rows();
    let mut features = ptr::null_mut();
    unsafe {
        assert_eq!(dm_features_from_rows(rows.as_ptr(), 6, 2, &mut features), DmStatus::Ok);
        assert_eq!(dm_features_rows(features), 6);
        assert_eq!(dm_features_cols(features), 2);

        let mut emb = ptr::null_mut();
        assert_eq!(dm_embed(features, 2, 2, &mut emb), DmStatus::Ok);
        assert_eq!(dm_embedding_size(emb), 6);
        assert_eq!(dm_embedding_count(emb), 2);
        assert_eq!(dm_embedding_components(emb), 1);

        let mut values = [0.0; 2];
        assert_eq!(dm_embedding_eigenvalues(emb, values.as_mut_ptr(), 2), DmStatus::Ok);
        assert!(values[0] > 0.0 && values[0] <= values[1] && values[1] <= 2.0);

        let mut v = [0.0; 6];
        assert_eq!(dm_embedding_eigenvector(emb, 1, v.as_mut_ptr(), 6), DmStatus::Ok);
        let norm: f64 = v.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);

        assert_eq!(dm_embedding_eigenvector(emb, 3, v.as_mut_ptr(), 6), DmStatus::InvalidArgument);
        assert!(last_error().contains("out of range"));
        assert_eq!(dm_embedding_eigenvector(emb, 1, v.as_mut_ptr(), 5), DmStatus::InvalidArgument);

        dm_embedding_free(emb);
        dm_features_free(features);
    }
}

#[test]
fn errors_are_reported() {
    let mut features = ptr::null_mut();
    let path = CString::new("/nonexistent/features.csv").unwrap();
    let id = CString::new("area_code").unwrap();
    unsafe {
        assert_eq!(dm_features_from_csv(path.as_ptr(), id.as_ptr(), &mut features), DmStatus::Io);
        assert!(features.is_null());
        assert!(last_error().contains("nonexistent"));

        assert_eq!(dm_features_from_csv(ptr::null(), id.as_ptr(), &mut features), DmStatus::NullPointer);

        let constant = [1.0; 6];
        assert_eq!(dm_features_from_rows(constant.as_ptr(), 3, 2, &mut features), DmStatus::Ok);
        let mut emb = ptr::null_mut();
        assert_eq!(dm_embed(features, 1, 1, &mut emb), DmStatus::InvalidInput);
        assert!(last_error().contains("constant"));
        assert_eq!(dm_embed(features, 0, 1, &mut emb), DmStatus::InvalidArgument);
        dm_features_free(features);

        dm_features_free(ptr::null_mut());
        dm_embedding_free(ptr::null_mut());
    }
}

#[test]
fn csv_and_pearson() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("f.csv");
    std::fs::write(&file, "area_code,a,b\nX,1,2\nY,2,1\nZ,4,4\n").unwrap();
    let path = CString::new(file.to_str().unwrap()).unwrap();
    let id = CString::new("area_code").unwrap();
    let mut features = ptr::null_mut();
    unsafe {
        assert_eq!(dm_features_from_csv(path.as_ptr(), id.as_ptr(), &mut features), DmStatus::Ok);
        assert_eq!(dm_features_rows(features), 3);
        dm_features_free(features);

        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 1.0, 4.0, 3.0];
        let mut r = 0.0;
        assert_eq!(dm_pearson(x.as_ptr(), y.as_ptr(), 4, &mut r), DmStatus::Ok);
        assert!((r - 0.6).abs() < 1e-12);
        assert_eq!(dm_pearson(x.as_ptr(), y.as_ptr(), 1, &mut r), DmStatus::InvalidInput);
    }
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/diffmap.h")).unwrap();
    for name in [
        "dm_last_error",
        "dm_features_from_csv",
        "dm_features_from_rows",
        "dm_embed",
        "dm_embedding_eigenvector",
        "dm_pearson",
        "DM_STATUS_OK",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
