use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use wetval_ffi::*;

fn data(name: &str) -> CString {
    let p = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name);
    CString::new(p.to_str().unwrap()).unwrap()
}

struct Loaded {
    ds: *mut WvDataset,
    fit: *mut WvFit,
}

impl Drop for Loaded {
    fn drop(&mut self) {
        unsafe {
            wv_fit_free(self.fit);
            wv_dataset_free(self.ds);
        }
    }
}

fn load() -> Loaded {
    let mut ds = ptr::null_mut();
    let mut fit = ptr::null_mut();
    unsafe {
        assert_eq!(
            wv_dataset_load(
                data("teeb_inland_wetlands.csv").as_ptr(),
                data("normalization_rates.csv").as_ptr(),
                &mut ds
            ),
            WvStatus::Ok
        );
        assert_eq!(wv_fit(ds, ptr::null(), &mut fit), WvStatus::Ok);
    }
    Loaded { ds, fit }
}

#[test]
fn screening_counts() {
    let l = load();
    unsafe {
        assert_eq!(wv_dataset_ingested(l.ds), 255);
        assert_eq!(wv_dataset_retained(l.ds), 70);
        assert_eq!(wv_dataset_articles(l.ds), 27);
    }
}

#[test]
fn fit_accessors_and_json_round_trip() {
    let l = load();
    unsafe {
        assert_eq!(wv_fit_num_params(l.fit), 19);
        let label = CStr::from_ptr(wv_fit_label(l.fit, 6)).to_str().unwrap();
        assert_eq!(label, "Quality");
        let mut p = WvParameter::default();
        assert_eq!(wv_fit_parameter(l.fit, 6, &mut p), WvStatus::Ok);
        assert!(p.coefficient > 0.0 && p.std_error > 0.0);

        let mut json = ptr::null_mut();
        assert_eq!(wv_fit_to_json(l.fit, &mut json), WvStatus::Ok);
        let mut copy = ptr::null_mut();
        assert_eq!(wv_fit_from_json(json, &mut copy), WvStatus::Ok);
        let mut q = WvParameter::default();
        assert_eq!(wv_fit_parameter(copy, 6, &mut q), WvStatus::Ok);
        assert_eq!(p.coefficient.to_bits(), q.coefficient.to_bits());
        wv_string_free(json);
        wv_fit_free(copy);
    }
}

#[test]
fn prediction_quality_gap() {
    let l = load();
    let dir = std::env::temp_dir().join(format!("wetval-ffi-sites-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sites.csv");
    std::fs::write(
        &path,
        "record_id,article_id,biome,wetland_type,service,method,value_basis,wetland_size_ha,gni_per_capita,population_density,ev_degradation_described,ev_degrading_activities,ev_market_price_method,ev_ideal_state_assumed,quality_code\n\
         good,,InlandWetlands,Floodplains,Food,DirectMarketPricing,PerAnnum,1000,1500,80,0,0,0,0,1\n\
         bad,,InlandWetlands,Floodplains,Food,DirectMarketPricing,PerAnnum,1000,1500,80,0,0,0,0,2\n",
    )
    .unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut sites = ptr::null_mut();
        assert_eq!(wv_sites_load(cpath.as_ptr(), &mut sites), WvStatus::Ok);
        assert_eq!(wv_sites_count(sites), 2);
        let (mut lg, mut lb, mut v) = (0.0, 0.0, 0.0);
        assert_eq!(
            wv_predict(l.fit, sites, 0, WvBackTransform::NaiveExp, &mut lg, &mut v),
            WvStatus::Ok
        );
        assert_eq!(v, lg.exp());
        assert_eq!(
            wv_predict(l.fit, sites, 1, WvBackTransform::NaiveExp, &mut lb, &mut v),
            WvStatus::Ok
        );
        let mut q = WvParameter::default();
        wv_fit_parameter(l.fit, 6, &mut q);
        assert!((lg - lb - q.coefficient).abs() < 1e-12);
        assert_eq!(
            wv_predict(l.fit, sites, 2, WvBackTransform::NaiveExp, &mut lb, &mut v),
            WvStatus::IndexOutOfRange
        );
        wv_sites_free(sites);
    }
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut ds = ptr::null_mut();
        let missing = CString::new("/nonexistent.csv").unwrap();
        let s = wv_dataset_load(
            missing.as_ptr(),
            data("normalization_rates.csv").as_ptr(),
            &mut ds,
        );
        assert_eq!(s, WvStatus::IoError);
        assert!(ds.is_null());
        let msg = CStr::from_ptr(wv_last_error_message()).to_str().unwrap();
        assert!(msg.starts_with("records: "), "{msg}");

        assert_eq!(
            wv_dataset_load(ptr::null(), ptr::null(), &mut ds),
            WvStatus::NullPointer
        );
        let bad = [0xffu8 as std::ffi::c_char, 0];
        assert_eq!(
            wv_dataset_load(bad.as_ptr(), bad.as_ptr(), &mut ds),
            WvStatus::InvalidUtf8
        );

        let mut v = 0.0;
        assert_eq!(wv_f_statistic(1.0, 20, 2, &mut v), WvStatus::InputError);
        assert!(wv_f_upper_tail(f64::NAN, 1.0, 1.0).is_nan());

        let l = load();
        let schema = CString::new("[[term]]\nkind = \"log\"\nfield = \"wetland_size_ha\"\n[[term]]\nkind = \"log\"\nfield = \"wetland_size_ha\"\nlabel = \"again\"\n").unwrap();
        let mut fit = ptr::null_mut();
        let s = wv_fit(l.ds, schema.as_ptr(), &mut fit);
        assert!(
            matches!(s, WvStatus::NumericalError | WvStatus::InputError),
            "{s:?}"
        );
        assert!(fit.is_null());
    }
}
