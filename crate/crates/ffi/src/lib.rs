//! C ABI over the tabletop engine.
//!
//! Sessions and stores are opaque handles. Structured data crosses the
//! boundary as UTF-8 JSON using the same shapes as the wire protocol and the
//! session file format. Every fallible call returns a [`TtStatus`]; on
//! failure, [`tt_last_error`] describes the most recent error on the calling
//! thread. Strings handed out by this library must be released with
//! [`tt_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tabletop_core::capture::noise_sigma;
use tabletop_core::capture::NoiseModel;
use tabletop_core::difficulty::{dda_update, DdaConfig, DifficultyState, Outcome};
use tabletop_core::persistence::{new_session_id, now_us, SessionRecord, Store, StoreError};
use tabletop_core::protocol::StateSnapshot;
use tabletop_core::{hit_test, AppConfig, PlanePoint, Session, SkeletonFrame};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TtStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    MalformedJson = 3,
    InvalidConfig = 4,
    RejectedFrame = 5,
    NotFound = 6,
    StoreError = 7,
    Panic = 8,
}

/// A live game session.
pub struct TtSession {
    app: AppConfig,
    inner: Session,
}

/// A directory of saved sessions.
pub struct TtStore {
    inner: Store,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Fail(TtStatus, String);

impl Fail {
    fn new(status: TtStatus, msg: impl ToString) -> Self {
        Self(status, msg.to_string())
    }
}

impl From<StoreError> for Fail {
    fn from(e: StoreError) -> Self {
        let status = match e {
            StoreError::NotFound(_) => TtStatus::NotFound,
            _ => TtStatus::StoreError,
        };
        Fail(status, e.to_string())
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TtStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TtStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::new(TtStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::new(TtStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| Fail::new(TtStatus::NullArgument, format!("{what} is null")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::new(TtStatus::NullArgument, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|e| Fail::new(TtStatus::Panic, e))?;
    write_out(out, c.into_raw())
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("engine types always serialize")
}

/// Message for the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string obtained from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn tt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a session. `overrides_json` is a JSON object merged onto the
/// default configuration, or null for defaults.
///
/// # Safety
/// `overrides_json` must be null or a NUL-terminated string; `out` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tt_session_new(
    overrides_json: *const c_char,
    out: *mut *mut TtSession,
) -> TtStatus {
    guard(|| {
        let mut app = AppConfig::default();
        if !overrides_json.is_null() {
            let text = read_str(overrides_json, "overrides_json")?;
            let value: serde_json::Value =
                serde_json::from_str(text).map_err(|e| Fail::new(TtStatus::MalformedJson, e))?;
            app = app
                .with_overrides(&value)
                .map_err(|e| Fail::new(TtStatus::InvalidConfig, e))?;
        }
        let inner = Session::new(app.game()).map_err(|e| Fail::new(TtStatus::InvalidConfig, e))?;
        write_out(out, Box::into_raw(Box::new(TtSession { app, inner })))
    })
}

/// Destroys a session. Null is ignored.
///
/// # Safety
/// `session` must be null or a handle from [`tt_session_new`], freed once.
#[no_mangle]
pub unsafe extern "C" fn tt_session_free(session: *mut TtSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Feeds one skeleton frame (JSON) to the session. On success `out_events`
/// receives a JSON array of the events the frame produced. A rejected frame
/// leaves the session unchanged.
///
/// # Safety
/// `session` must be a live handle, `frame_json` a NUL-terminated string and
/// `out_events` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tt_session_push_frame(
    session: *mut TtSession,
    frame_json: *const c_char,
    out_events: *mut *mut c_char,
) -> TtStatus {
    guard(|| {
        let s = handle(session, "session")?;
        let text = read_str(frame_json, "frame_json")?;
        let frame: SkeletonFrame =
            serde_json::from_str(text).map_err(|e| Fail::new(TtStatus::MalformedJson, e))?;
        if out_events.is_null() {
            return Err(Fail::new(TtStatus::NullArgument, "output pointer is null"));
        }
        let events = s
            .inner
            .push_frame(frame)
            .map_err(|e| Fail::new(TtStatus::RejectedFrame, e))?;
        write_string(out_events, to_json(&events))
    })
}

/// Writes the current state snapshot (the protocol's `state` body) as JSON.
///
/// # Safety
/// `session` must be a live handle and `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tt_session_state(
    session: *mut TtSession,
    out_json: *mut *mut c_char,
) -> TtStatus {
    guard(|| {
        let s = handle(session, "session")?;
        let snap = StateSnapshot::capture(s.inner.state(), &s.app.avatar, None);
        write_string(out_json, to_json(&snap))
    })
}

/// Writes the session metrics as JSON. Metrics of a session without drops
/// are absent from the object.
///
/// # Safety
/// `session` must be a live handle and `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tt_session_metrics(
    session: *mut TtSession,
    out_json: *mut *mut c_char,
) -> TtStatus {
    guard(|| {
        let s = handle(session, "session")?;
        write_string(out_json, to_json(&s.inner.metrics()))
    })
}

/// Current score and target radius.
///
/// # Safety
/// `session` must be a live handle; `out_score` and `out_radius` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tt_session_progress(
    session: *mut TtSession,
    out_score: *mut u32,
    out_radius: *mut f64,
) -> TtStatus {
    guard(|| {
        let s = handle(session, "session")?;
        write_out(out_score, s.inner.state().score)?;
        write_out(out_radius, s.inner.state().radius())
    })
}

/// Opens (creating if needed) a session store directory.
///
/// # Safety
/// `root` must be a NUL-terminated path and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tt_store_open(root: *const c_char, out: *mut *mut TtStore) -> TtStatus {
    guard(|| {
        let root = read_str(root, "root")?;
        let inner = Store::open(root)?;
        write_out(out, Box::into_raw(Box::new(TtStore { inner })))
    })
}

/// Closes a store. Null is ignored.
///
/// # Safety
/// `store` must be null or a handle from [`tt_store_open`], freed once.
#[no_mangle]
pub unsafe extern "C" fn tt_store_free(store: *mut TtStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Saves a snapshot of the session under a fresh id, written to `out_id`.
/// The session stays usable.
///
/// # Safety
/// Both handles must be live and `out_id` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tt_store_save_session(
    store: *mut TtStore,
    session: *mut TtSession,
    out_id: *mut *mut c_char,
) -> TtStatus {
    guard(|| {
        let st = handle(store, "store")?;
        let s = handle(session, "session")?;
        let created = now_us();
        let record = SessionRecord::new(
            new_session_id(created),
            created,
            s.inner.config(),
            s.inner.state().drops.clone(),
            s.inner.events().to_vec(),
        );
        let id = st.inner.save(&record)?;
        write_string(out_id, id)
    })
}

/// Writes the summaries of all stored sessions as a JSON array.
///
/// # Safety
/// `store` must be a live handle and `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tt_store_list(
    store: *mut TtStore,
    out_json: *mut *mut c_char,
) -> TtStatus {
    guard(|| {
        let st = handle(store, "store")?;
        write_string(out_json, to_json(&st.inner.list()?))
    })
}

/// Loads a stored session record as JSON.
///
/// # Safety
/// `store` must be a live handle, `id` a NUL-terminated string and
/// `out_json` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tt_store_load(
    store: *mut TtStore,
    id: *const c_char,
    out_json: *mut *mut c_char,
) -> TtStatus {
    guard(|| {
        let st = handle(store, "store")?;
        let id = read_str(id, "id")?;
        write_string(out_json, to_json(&st.inner.load(id)?))
    })
}

/// Deletes a stored session.
///
/// # Safety
/// `store` must be a live handle and `id` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tt_store_delete(store: *mut TtStore, id: *const c_char) -> TtStatus {
    guard(|| {
        let st = handle(store, "store")?;
        let id = read_str(id, "id")?;
        st.inner.delete(id)?;
        Ok(())
    })
}

/// Per-axis sensor noise standard deviation at `depth` meters.
#[no_mangle]
pub extern "C" fn tt_noise_sigma(sigma_near: f64, sigma_far: f64, depth: f64) -> f64 {
    noise_sigma(
        &NoiseModel {
            sigma_near,
            sigma_far,
        },
        depth,
    )
}

/// Whether a landing point lies inside (or on) the target disc.
#[no_mangle]
pub extern "C" fn tt_hit_test(
    landing_x: f64,
    landing_z: f64,
    center_x: f64,
    center_z: f64,
    radius: f64,
) -> bool {
    hit_test(
        PlanePoint::new(landing_x, landing_z),
        PlanePoint::new(center_x, center_z),
        radius,
    )
}

/// One difficulty update with the default policy. `hit` selects the
/// outcome; the streak counters are carried in and out through pointers.
///
/// # Safety
/// All pointers must be valid for reads and writes.
#[no_mangle]
pub unsafe extern "C" fn tt_dda_update(
    radius: *mut f64,
    success_streak: *mut u32,
    miss_streak: *mut u32,
    hit: bool,
) -> TtStatus {
    guard(|| {
        let (r, s, m) = (
            handle(radius, "radius")?,
            handle(success_streak, "success_streak")?,
            handle(miss_streak, "miss_streak")?,
        );
        let state = DifficultyState {
            radius: *r,
            success_streak: *s,
            miss_streak: *m,
        };
        let next = dda_update(state, &DdaConfig::default(), Outcome::from_hit(hit));
        *r = next.radius;
        *s = next.success_streak;
        *m = next.miss_streak;
        Ok(())
    })
}
