//! In-memory census cache shared by formula checks, with an optional
//! persistent backing store.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use crate::census::{census, CensusError, CensusOptions, CountVector, Engine};
use crate::ring::{Ring, RingError};

/// Persistent census storage, e.g. a cache directory. Implementations must
/// only return vectors they can vouch for; the cache re-checks the total.
pub trait CensusStore: Send + Sync {
    fn load(&self, ring: &str, n: u32, engine: Engine) -> Option<CountVector>;
    fn save(&self, cv: &CountVector);
}

type Key = (String, u32, Engine);
type Cell = Arc<OnceLock<Result<Arc<CountVector>, CensusError>>>;

/// Each `(ring, n, engine)` census is computed at most once per cache, even
/// under concurrent requests; other callers block on the same cell.
pub struct CensusCache {
    options: CensusOptions,
    store: Option<Arc<dyn CensusStore>>,
    cells: Mutex<HashMap<Key, Cell>>,
    rings: Mutex<HashMap<String, Arc<Ring>>>,
    computed: AtomicUsize,
    loaded: AtomicUsize,
}

impl Default for CensusCache {
    fn default() -> Self {
        CensusCache::new(CensusOptions::default())
    }
}

impl CensusCache {
    pub fn new(options: CensusOptions) -> CensusCache {
        CensusCache {
            options,
            store: None,
            cells: Mutex::new(HashMap::new()),
            rings: Mutex::new(HashMap::new()),
            computed: AtomicUsize::new(0),
            loaded: AtomicUsize::new(0),
        }
    }

    pub fn with_store(mut self, store: Arc<dyn CensusStore>) -> CensusCache {
        self.store = Some(store);
        self
    }

    pub fn options(&self) -> &CensusOptions {
        &self.options
    }

    /// Parses and builds a ring once per descriptor string.
    pub fn ring(&self, desc: &str) -> Result<Arc<Ring>, RingError> {
        if let Some(r) = self.rings.lock().unwrap().get(desc) {
            return Ok(r.clone());
        }
        let ring = Arc::new(Ring::parse(desc)?);
        let mut rings = self.rings.lock().unwrap();
        rings.insert(desc.to_string(), ring.clone());
        rings.insert(ring.descriptor().to_string(), ring.clone());
        Ok(ring)
    }

    pub fn get(&self, ring: &Ring, n: u32, engine: Engine) -> Result<Arc<CountVector>, CensusError> {
        let key = (ring.descriptor().to_string(), n, engine);
        let cell = self.cells.lock().unwrap().entry(key.clone()).or_default().clone();
        cell.get_or_init(|| self.produce(ring, n, engine)).clone()
    }

    fn produce(&self, ring: &Ring, n: u32, engine: Engine) -> Result<Arc<CountVector>, CensusError> {
        let name = ring.descriptor().to_string();
        if let Some(store) = &self.store {
            if let Some(cv) = store.load(&name, n, engine) {
                if let Ok(cv) = CountVector::from_parts(ring, n, engine, cv.counts().to_vec()) {
                    self.loaded.fetch_add(1, Ordering::Relaxed);
                    return Ok(Arc::new(cv));
                }
            }
        }
        let cv = census(ring, n, engine, &self.options)?;
        self.computed.fetch_add(1, Ordering::Relaxed);
        if let Some(store) = &self.store {
            store.save(&cv);
        }
        Ok(Arc::new(cv))
    }

    /// Censuses actually computed (not served from memory or the store).
    pub fn fresh_computations(&self) -> usize {
        self.computed.load(Ordering::Relaxed)
    }

    pub fn store_hits(&self) -> usize {
        self.loaded.load(Ordering::Relaxed)
    }
}
