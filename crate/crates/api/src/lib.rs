//! Read-only HTTP JSON service over one or more bundles.
//!
//! | route | body |
//! |-------|------|
//! | `GET /editions` | loaded editions and their run parameters |
//! | `GET /editions/{ed}/years/{year}/network?top=K` | ranked nodes and links of one year |
//! | `GET /editions/{ed}/rankings/alltime?top=N` | all-time ranking |
//! | `GET /editions/{ed}/people/{id}` | one person and their yearly ranks |
//! | `GET /editions/{ed}/reports/{categories,ingroup}?top=N` | top-n reports |
//! | `GET /compare?editions=a,b&top=N` | cross-edition comparison |
//!
//! Errors are `{"error": "..."}` with status 400 for malformed requests and
//! 404 for unknown editions, years, people or routes.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::rejection::{PathRejection, QueryRejection};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use chronograph_core::bundle::{read_bundle, Bundle, BundleError};
use chronograph_core::centrality::Aggregation;
use chronograph_core::person::{Horizon, Occupation, PersonId, Year};
use chronograph_core::pipeline::{SeriesPoint, YearRecord};
use chronograph_core::reports::{
    category_distribution, compare_editions, ingroup_report, EditionView, IdentityMap, ReportError,
};
use lru::LruCache;
use serde::Serialize;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub const DEFAULT_CACHE_YEARS: usize = 128;
const DEFAULT_TOP: usize = 50;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("no bundles to serve")]
    NoBundles,
    #[error("edition {0:?} is loaded twice")]
    DuplicateEdition(String),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error("identity map {}: {source}", path.display())]
    Identity {
        path: PathBuf,
        #[source]
        source: ReportError,
    },
    #[error("invalid CORS origin {0:?}")]
    Origin(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    pub bundles: Vec<PathBuf>,
    pub identity: Option<PathBuf>,
    /// Origins allowed by CORS; empty disables the CORS layer.
    pub cors_origins: Vec<String>,
    pub cache_years: usize,
}

impl ServiceConfig {
    pub fn new(addr: SocketAddr, bundles: Vec<PathBuf>) -> Self {
        ServiceConfig {
            addr,
            bundles,
            identity: None,
            cors_origins: Vec::new(),
            cache_years: DEFAULT_CACHE_YEARS,
        }
    }
}

struct Edition {
    bundle: Bundle,
    years: Mutex<LruCache<Year, Arc<YearRecord>>>,
}

impl Edition {
    fn year(&self, year: Year) -> Result<Arc<YearRecord>, BundleError> {
        if let Some(hit) = self.years.lock().expect("cache lock").get(&year) {
            return Ok(Arc::clone(hit));
        }
        let record = Arc::new(self.bundle.year(year)?);
        self.years
            .lock()
            .expect("cache lock")
            .put(year, Arc::clone(&record));
        Ok(record)
    }
}

/// Loaded bundles, keyed by edition.
pub struct AppState {
    editions: BTreeMap<String, Edition>,
    identity: IdentityMap,
}

impl AppState {
    pub fn new(
        bundles: Vec<Bundle>,
        identity: IdentityMap,
        cache_years: usize,
    ) -> Result<Self, ServiceError> {
        if bundles.is_empty() {
            return Err(ServiceError::NoBundles);
        }
        let capacity = NonZeroUsize::new(cache_years.max(1)).expect("nonzero");
        let mut editions = BTreeMap::new();
        for bundle in bundles {
            let key = bundle.edition().to_owned();
            if editions.contains_key(&key) {
                return Err(ServiceError::DuplicateEdition(key));
            }
            // Fail at startup rather than on the first request.
            bundle.people()?;
            bundle.alltime()?;
            bundle.series()?;
            let edition = Edition {
                bundle,
                years: Mutex::new(LruCache::new(capacity)),
            };
            editions.insert(key, edition);
        }
        Ok(AppState { editions, identity })
    }

    pub fn load(config: &ServiceConfig) -> Result<Self, ServiceError> {
        let bundles = config
            .bundles
            .iter()
            .map(read_bundle)
            .collect::<Result<Vec<_>, _>>()?;
        let identity = match &config.identity {
            Some(path) => read_identity(path)?,
            None => IdentityMap::default(),
        };
        AppState::new(bundles, identity, config.cache_years)
    }

    fn edition(&self, name: &str) -> Result<&Edition, ApiError> {
        self.editions
            .get(name)
            .ok_or_else(|| ApiError::not_found(format!("unknown edition {name:?}")))
    }
}

fn read_identity(path: &Path) -> Result<IdentityMap, ServiceError> {
    let file = std::fs::File::open(path)?;
    IdentityMap::read(std::io::BufReader::new(file)).map_err(|source| ServiceError::Identity {
        path: path.to_owned(),
        source,
    })
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: message.into(),
        }
    }
}

impl From<BundleError> for ApiError {
    fn from(e: BundleError) -> Self {
        match e {
            BundleError::OutOfRange { .. } => ApiError::not_found(e.to_string()),
            _ => {
                log::error!("{e}");
                ApiError::internal(e.to_string())
            }
        }
    }
}

impl From<ReportError> for ApiError {
    fn from(e: ReportError) -> Self {
        log::error!("{e}");
        ApiError::internal(e.to_string())
    }
}

impl From<PathRejection> for ApiError {
    fn from(e: PathRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(serde_json::json!({ "error": self.message }));
        (self.status, body).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;
type Params = Result<Query<HashMap<String, String>>, QueryRejection>;

fn top_param(params: Params, default: usize) -> Result<usize, ApiError> {
    let Query(params) = params?;
    top_value(&params, default)
}

fn top_value(params: &HashMap<String, String>, default: usize) -> Result<usize, ApiError> {
    match params.get("top") {
        None => Ok(default),
        Some(raw) => match raw.parse::<usize>() {
            Ok(0) | Err(_) => Err(ApiError::bad_request(format!(
                "top must be a positive integer, got {raw:?}"
            ))),
            Ok(n) => Ok(n),
        },
    }
}

#[derive(Serialize)]
struct EditionSummary<'a> {
    edition: &'a str,
    culture: &'a str,
    horizon: Horizon,
    k: usize,
    aggregation: Aggregation,
    persons: usize,
    links: usize,
    nonempty_year_count: usize,
    report_sizes: &'a [usize],
}

#[derive(Serialize)]
struct EditionList<'a> {
    editions: Vec<EditionSummary<'a>>,
}

async fn list_editions(State(state): State<Arc<AppState>>) -> Response {
    let editions = state
        .editions
        .values()
        .map(|e| {
            let m = e.bundle.manifest();
            EditionSummary {
                edition: &m.edition,
                culture: &m.culture,
                horizon: m.horizon,
                k: m.k,
                aggregation: m.aggregation,
                persons: m.persons,
                links: m.links,
                nonempty_year_count: m.nonempty_year_count,
                report_sizes: &m.report_sizes,
            }
        })
        .collect();
    Json(EditionList { editions }).into_response()
}

#[derive(Serialize)]
struct NetworkNode<'a> {
    id: PersonId,
    title: &'a str,
    rank: usize,
    pagerank: f64,
    indegree: u32,
}

#[derive(Serialize)]
struct Network<'a> {
    edition: &'a str,
    year: Year,
    nodes: Vec<NetworkNode<'a>>,
    edges: Vec<(PersonId, PersonId)>,
}

fn title(people: &[chronograph_core::Person], id: PersonId) -> Result<&str, ApiError> {
    people
        .get(id as usize)
        .map(|p| p.title.as_str())
        .ok_or_else(|| ApiError::internal(format!("bundle references unknown person {id}")))
}

async fn year_network(
    State(state): State<Arc<AppState>>,
    path: Result<UrlPath<(String, String)>, PathRejection>,
    params: Params,
) -> ApiResult {
    let UrlPath((name, raw_year)) = path?;
    let edition = state.edition(&name)?;
    let year: Year = raw_year
        .parse()
        .map_err(|_| ApiError::bad_request(format!("year must be an integer, got {raw_year:?}")))?;
    let top = top_param(params, edition.bundle.manifest().k)?;
    let record = edition.year(year)?;
    let record = record.truncated(top);
    let people = edition.bundle.people()?;
    let nodes = record
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            Ok(NetworkNode {
                id: e.id,
                title: title(people, e.id)?,
                rank: i + 1,
                pagerank: e.pagerank,
                indegree: e.indegree,
            })
        })
        .collect::<Result<Vec<_>, ApiError>>()?;
    Ok(Json(Network {
        edition: &edition.bundle.manifest().edition,
        year,
        nodes,
        edges: record.edges,
    })
    .into_response())
}

#[derive(Serialize)]
struct AllTimeRow<'a> {
    rank: usize,
    id: PersonId,
    title: &'a str,
    score: f64,
    indegree: u64,
}

#[derive(Serialize)]
struct AllTime<'a> {
    edition: &'a str,
    method: Aggregation,
    entries: Vec<AllTimeRow<'a>>,
}

async fn alltime(
    State(state): State<Arc<AppState>>,
    path: Result<UrlPath<String>, PathRejection>,
    params: Params,
) -> ApiResult {
    let UrlPath(name) = path?;
    let edition = state.edition(&name)?;
    let top = top_param(params, DEFAULT_TOP)?;
    let ranking = edition.bundle.alltime()?;
    let people = edition.bundle.people()?;
    let entries = ranking
        .top(top)
        .iter()
        .enumerate()
        .map(|(i, e)| {
            Ok(AllTimeRow {
                rank: i + 1,
                id: e.id,
                title: title(people, e.id)?,
                score: e.score,
                indegree: e.indegree,
            })
        })
        .collect::<Result<Vec<_>, ApiError>>()?;
    Ok(Json(AllTime {
        edition: &ranking.edition,
        method: ranking.method,
        entries,
    })
    .into_response())
}

#[derive(Serialize)]
struct PersonBody<'a> {
    edition: &'a str,
    id: PersonId,
    title: &'a str,
    birth: Year,
    death: Year,
    occupation: Occupation,
    culture: &'a str,
    series: &'a [SeriesPoint],
}

async fn person(
    State(state): State<Arc<AppState>>,
    path: Result<UrlPath<(String, String)>, PathRejection>,
) -> ApiResult {
    let UrlPath((name, raw_id)) = path?;
    let edition = state.edition(&name)?;
    let id: PersonId = raw_id.parse().map_err(|_| {
        ApiError::bad_request(format!(
            "person id must be a non-negative integer, got {raw_id:?}"
        ))
    })?;
    let p = edition
        .bundle
        .person(id)?
        .ok_or_else(|| ApiError::not_found(format!("unknown person {id}")))?;
    let series = edition
        .bundle
        .series()?
        .get(&id)
        .map_or(&[][..], Vec::as_slice);
    Ok(Json(PersonBody {
        edition: &edition.bundle.manifest().edition,
        id,
        title: &p.title,
        birth: p.birth,
        death: p.death,
        occupation: p.occupation,
        culture: &p.culture,
        series,
    })
    .into_response())
}

async fn report(
    State(state): State<Arc<AppState>>,
    path: Result<UrlPath<(String, String)>, PathRejection>,
    params: Params,
) -> ApiResult {
    let UrlPath((name, kind)) = path?;
    let edition = state.edition(&name)?;
    if kind != "categories" && kind != "ingroup" {
        return Err(ApiError::not_found(format!(
            "unknown report {kind:?} (expected categories or ingroup)"
        )));
    }
    let top = top_param(params, DEFAULT_TOP)?;
    let b = &edition.bundle;
    let categories = category_distribution(b.alltime()?, b.people()?, &b.manifest().culture, top)?;
    Ok(if kind == "categories" {
        Json(categories).into_response()
    } else {
        Json(ingroup_report(&categories)).into_response()
    })
}

async fn compare(State(state): State<Arc<AppState>>, params: Params) -> ApiResult {
    let Query(map) = params?;
    let top = top_value(&map, DEFAULT_TOP)?;
    let names: Vec<&str> = match map.get("editions") {
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect(),
        None => return Err(ApiError::bad_request("missing editions parameter")),
    };
    if names.len() < 2 {
        return Err(ApiError::bad_request("compare needs at least two editions"));
    }
    let mut views = Vec::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(ApiError::bad_request(format!(
                "edition {name:?} listed twice"
            )));
        }
        let b = &state.edition(name)?.bundle;
        views.push(EditionView {
            ranking: b.alltime()?,
            people: b.people()?,
            culture: &b.manifest().culture,
        });
    }
    let report = compare_editions(&views, &state.identity, top)?;
    Ok(Json(report).into_response())
}

async fn not_found() -> ApiError {
    ApiError::not_found("no such route")
}

fn cors_layer(origins: &[String]) -> Result<CorsLayer, ServiceError> {
    let values = origins
        .iter()
        .map(|o| HeaderValue::from_str(o).map_err(|_| ServiceError::Origin(o.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CorsLayer::new()
        .allow_methods([Method::GET])
        .allow_origin(AllowOrigin::list(values)))
}

/// Builds the router. An empty `cors_origins` adds no CORS headers.
pub fn router(state: Arc<AppState>, cors_origins: &[String]) -> Result<Router, ServiceError> {
    let router = Router::new()
        .route("/editions", get(list_editions))
        .route(
            "/editions/{edition}/years/{year}/network",
            get(year_network),
        )
        .route("/editions/{edition}/rankings/alltime", get(alltime))
        .route("/editions/{edition}/people/{id}", get(person))
        .route("/editions/{edition}/reports/{kind}", get(report))
        .route("/compare", get(compare))
        .fallback(not_found)
        .with_state(state);
    if cors_origins.is_empty() {
        Ok(router)
    } else {
        Ok(router.layer(cors_layer(cors_origins)?))
    }
}

/// Loads the configured bundles and serves until the process is stopped.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let state = Arc::new(AppState::load(&config)?);
    let app = router(state, &config.cors_origins)?;
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}
