//! Command line front end for the affectrec library.
//!
//! Subcommands cover the full pipeline: ingest rating and emotion files
//! into a dataset, inspect stats, query cross-dataset matches, form
//! simulcast groups, manage user groups, produce reranked and group
//! recommendations, and benchmark grouped versus per-user list generation.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on domain or data
//! errors. Domain failures print `error: <Name>: <detail>` on stderr. All
//! randomness flows from `--seed`; identical inputs and seed produce
//! byte-identical output files.

use affectrec::affect::EmotionVector;
use affectrec::association::{pac_user_to_user, AssocError};
use affectrec::grouping::{
    form_ssg, form_ssg_disjoint, write_ssg_csv, GroupError, MultiGroup, MultiGroupStore,
    RemoveOutcome, Visibility,
};
use affectrec::ingest::{load_emotion_labels, load_ratings, merge, Dataset, IngestError};
use affectrec::recommend::{
    aggregate_ratings, broadcast, predict_group_item_rating, read_candidates, recommend_for_group,
    rerank, take_aii_evaluations, write_broadcast_dir, write_ranked_csv, AggregationFn, Candidate,
    EffectiveProfile, GroupRatingsSlice, GroupStrategy, RankedList, RecommendError,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "affectrec", version, about = "Emotion-profile recommendation toolkit")]
struct Cli {
    /// Output directory for generated files (default: $AFFECT_REC_HOME or .)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Join a ratings CSV with an emotion label CSV into a dataset file
    Ingest {
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long)]
        emotions: PathBuf,
        /// Name of the produced dataset
        #[arg(long, default_value = "dataset")]
        dataset_id: String,
    },
    /// Print the stats row of a dataset
    Stats {
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Find a user's closest counterparts in another dataset
    Pac {
        #[command(flatten)]
        source: SourceArgs,
        /// Source user id
        #[arg(long)]
        user: u64,
        /// Target dataset JSON
        #[arg(long)]
        target: PathBuf,
        /// Number of matches to keep
        #[arg(long, default_value_t = 1)]
        k: u64,
    },
    /// Form simulcast groups and write them as CSV
    FormSsg {
        #[command(flatten)]
        source: SourceArgs,
        /// Number of groups
        #[arg(long)]
        g: u64,
        /// Members drawn per group, anchor excluded
        #[arg(long)]
        m: u64,
    },
    /// Create and maintain user groups
    Group {
        #[command(subcommand)]
        action: GroupAction,
    },
    /// Rerank a candidate list for one user
    Rerank {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        user: u64,
        /// Candidate pool CSV (rank,item_id,title)
        #[arg(long)]
        candidates: PathBuf,
        /// List length
        #[arg(long, default_value_t = 10)]
        n: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Produce a group list under a decision strategy
    GroupRecommend {
        #[command(flatten)]
        source: SourceArgs,
        /// Group id in the store, or a path to a group JSON file
        #[arg(long)]
        group: String,
        /// dominant, least-misery, or average-profile
        #[arg(long)]
        strategy: String,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long, default_value_t = 10)]
        n: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Also aggregate the members' own ratings of the candidates:
        /// least-misery, average, or average-without-misery
        #[arg(long)]
        aggregate: Option<String>,
        /// Rating threshold for average-without-misery
        #[arg(long, default_value_t = 3.0)]
        tau: f64,
        /// Also predict the group's rating for this item
        #[arg(long)]
        predict_item: Option<u64>,
        /// Raters required for a prediction
        #[arg(long, default_value_t = 1)]
        min_raters: u64,
    },
    /// Broadcast a candidate list to every simulcast group, personalized
    /// per member
    Simulcast {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        g: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long, default_value_t = 10)]
        n: u64,
    },
    /// Measure grouped versus per-user list generation on a synthetic
    /// dataset
    Bench {
        /// Users in the synthetic dataset
        #[arg(long, default_value_t = 610)]
        users: u64,
        /// Items in the synthetic dataset
        #[arg(long, default_value_t = 300)]
        items: u64,
        /// Most ratings any synthetic user has
        #[arg(long, default_value_t = 20)]
        ratings_per_user: u64,
        /// Members drawn per group, anchor excluded (disjoint mode)
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 10)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum GroupAction {
    /// Create a group; the owner is its first member
    Create {
        #[arg(long)]
        name: String,
        #[arg(long)]
        owner: u64,
        /// pmg (private) or omg (open)
        #[arg(long, default_value = "pmg")]
        visibility: String,
        /// Additional members, comma separated
        #[arg(long, value_delimiter = ',')]
        members: Vec<u64>,
    },
    /// Add a member (owner only)
    Add {
        #[arg(long)]
        group: String,
        #[arg(long)]
        actor: u64,
        #[arg(long)]
        user: u64,
    },
    /// Remove a member (owner only; removing the owner deletes the group)
    Remove {
        #[arg(long)]
        group: String,
        #[arg(long)]
        actor: u64,
        #[arg(long)]
        user: u64,
    },
    /// List all groups
    List,
}

/// Where a subcommand's dataset comes from: an ingested JSON file, or a
/// ratings/emotions CSV pair joined on the fly.
#[derive(Args)]
struct SourceArgs {
    /// Ingested dataset JSON
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Ratings CSV (use with --emotions instead of --dataset)
    #[arg(long)]
    ratings: Option<PathBuf>,
    /// Emotion label CSV (use with --ratings)
    #[arg(long)]
    emotions: Option<PathBuf>,
    /// Name for datasets built from CSV inputs
    #[arg(long, default_value = "dataset")]
    dataset_id: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

/// Benchmark counters. Counts are exact call tallies, never estimates;
/// timings are printed to stderr rather than stored, so the report file is
/// identical across runs with the same inputs and seed.
#[derive(Serialize)]
struct BenchReport {
    n_users: u64,
    m: u64,
    groups_formed: u64,
    topn_generations_personalized: u64,
    topn_generations_grouped: u64,
    reduction_factor: f64,
    aii_evaluations_personalized: u64,
    aii_evaluations_grouped: u64,
}

enum CliError {
    Usage(String),
    Ingest(IngestError),
    Assoc(AssocError),
    Group(GroupError),
    Recommend(RecommendError),
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn name(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Ingest(e) => e.name(),
            CliError::Assoc(e) => e.name(),
            CliError::Group(e) => e.name(),
            CliError::Recommend(e) => e.name(),
            CliError::Io { .. } => "Io",
        }
    }

    fn detail(&self) -> String {
        match self {
            CliError::Usage(message) => message.clone(),
            CliError::Ingest(e) => e.to_string(),
            CliError::Assoc(e) => e.to_string(),
            CliError::Group(e) => e.to_string(),
            CliError::Recommend(e) => e.to_string(),
            CliError::Io { path, source } => format!("{}: {source}", path.display()),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> CliError {
        CliError::Ingest(e)
    }
}

impl From<AssocError> for CliError {
    fn from(e: AssocError) -> CliError {
        CliError::Assoc(e)
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> CliError {
        CliError::Group(e)
    }
}

impl From<RecommendError> for CliError {
    fn from(e: RecommendError) -> CliError {
        CliError::Recommend(e)
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Usage(message)) => {
            eprintln!("usage error: {message}");
            std::process::exit(1);
        }
        Err(e) => {
            eprintln!("error: {}: {}", e.name(), e.detail());
            std::process::exit(2);
        }
    }
}

/// The output directory: --out, then $AFFECT_REC_HOME, then the working
/// directory.
fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("AFFECT_REC_HOME").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn positive(name: &str, value: u64) -> Result<usize, CliError> {
    if value == 0 {
        return Err(CliError::Usage(format!("{name} must be positive")));
    }
    Ok(value as usize)
}

fn load_dataset(source: &SourceArgs) -> Result<Dataset, CliError> {
    match (&source.dataset, &source.ratings, &source.emotions) {
        (Some(path), None, None) => Ok(Dataset::read_json(path)?),
        (None, Some(ratings_path), Some(emotions_path)) => {
            let ratings = load_ratings(ratings_path)?;
            let labels = load_emotion_labels(emotions_path)?;
            if labels.mood_mismatches > 0 {
                eprintln!(
                    "note: {} label rows carry a mood differing from their vector's argmax",
                    labels.mood_mismatches
                );
            }
            Ok(merge(ratings, labels.records, &source.dataset_id)?)
        }
        _ => Err(CliError::Usage(
            "provide --dataset, or --ratings together with --emotions".to_string(),
        )),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
    }
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn stats_row(dataset: &Dataset) -> String {
    let stats = dataset.stats();
    format!(
        "dataset {}: users={} movies={} ratings={} labeled={} dropped={}",
        dataset.dataset_id(),
        stats.n_users,
        stats.n_movies,
        stats.n_ratings,
        stats.n_emotion_labeled,
        stats.n_ratings_dropped
    )
}

fn groups_dir(out: &Path) -> PathBuf {
    out.join("groups")
}

fn load_group(store_dir: &Path, value: &str) -> Result<MultiGroup, CliError> {
    let as_path = Path::new(value);
    if as_path.is_file() {
        let text = std::fs::read_to_string(as_path).map_err(|source| CliError::Io {
            path: as_path.to_path_buf(),
            source,
        })?;
        return serde_json::from_str(&text).map_err(|e| {
            CliError::Group(GroupError::Malformed {
                path: as_path.to_path_buf(),
                message: e.to_string(),
            })
        });
    }
    let store = MultiGroupStore::load_dir(store_dir)?;
    store
        .get(value)
        .cloned()
        .ok_or(CliError::Group(GroupError::UnknownGroup {
            group_id: value.to_string(),
        }))
}

fn parse_strategy(value: &str) -> Result<GroupStrategy, CliError> {
    GroupStrategy::from_str(value).map_err(|_| {
        CliError::Usage(format!(
            "unknown strategy {value:?}; expected dominant, least-misery, or average-profile"
        ))
    })
}

fn parse_visibility(value: &str) -> Result<Visibility, CliError> {
    Visibility::from_str(value)
        .map_err(|_| CliError::Usage(format!("unknown visibility {value:?}; expected pmg or omg")))
}

fn parse_aggregation(value: &str, tau: f64) -> Result<AggregationFn, CliError> {
    match value.replace('_', "-").as_str() {
        "least-misery" => Ok(AggregationFn::LeastMisery),
        "average" => Ok(AggregationFn::Average),
        "average-without-misery" => Ok(AggregationFn::AverageWithoutMisery { tau }),
        _ => Err(CliError::Usage(format!(
            "unknown aggregation {value:?}; expected least-misery, average, or average-without-misery"
        ))),
    }
}

fn strategy_slug(strategy: GroupStrategy) -> &'static str {
    match strategy {
        GroupStrategy::Dominant => "dominant",
        GroupStrategy::LeastMisery => "least-misery",
        GroupStrategy::AverageProfile => "average-profile",
    }
}

fn write_ranked_list(
    list: &RankedList,
    path_base: &Path,
    format: OutputFormat,
) -> Result<PathBuf, CliError> {
    match format {
        OutputFormat::Json => {
            let path = path_base.with_extension("json");
            write_file(&path, list.to_json().as_bytes())?;
            Ok(path)
        }
        OutputFormat::Csv => {
            let path = path_base.with_extension("csv");
            let mut bytes = Vec::new();
            write_ranked_csv(list, &mut bytes).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            write_file(&path, &bytes)?;
            Ok(path)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out = out_dir(cli.out);
    match cli.command {
        Command::Ingest {
            ratings,
            emotions,
            dataset_id,
        } => {
            let source = SourceArgs {
                dataset: None,
                ratings: Some(ratings),
                emotions: Some(emotions),
                dataset_id,
            };
            let dataset = load_dataset(&source)?;
            let path = out.join(format!("{}.json", dataset.dataset_id()));
            write_file(&path, dataset.export().to_json().as_bytes())?;
            println!("{}", stats_row(&dataset));
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Stats { source } => {
            let dataset = load_dataset(&source)?;
            println!("{}", stats_row(&dataset));
            Ok(())
        }
        Command::Pac {
            source,
            user,
            target,
            k,
        } => {
            let k = positive("--k", k)?;
            let dataset = load_dataset(&source)?;
            let target = Dataset::read_json(&target)?;
            let matches = pac_user_to_user(&dataset, user, &target, k)?;
            for pac_match in &matches {
                let line = serde_json::to_string(pac_match).expect("match serializes");
                println!("{line}");
            }
            Ok(())
        }
        Command::FormSsg { source, g, m } => {
            let g = positive("--g", g)?;
            let m = positive("--m", m)?;
            let dataset = load_dataset(&source)?;
            let groups = form_ssg(&dataset, g, m)?;
            let path = out.join("ssg.csv");
            let mut bytes = Vec::new();
            write_ssg_csv(&groups, &mut bytes).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            write_file(&path, &bytes)?;
            let rows: usize = groups.iter().map(|group| group.size()).sum();
            println!("formed {} groups, {} membership rows", groups.len(), rows);
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Group { action } => run_group(action, &groups_dir(&out)),
        Command::Rerank {
            source,
            user,
            candidates,
            n,
            format,
        } => {
            let n = positive("--n", n)?;
            let dataset = load_dataset(&source)?;
            let pool = read_candidates(&candidates, &dataset)?;
            let profile =
                dataset
                    .user_profile(user)
                    .ok_or(CliError::Recommend(RecommendError::UnknownUser {
                        dataset_id: dataset.dataset_id().to_string(),
                        user_id: user,
                    }))?;
            let entries = rerank(profile.uvec(), &pool, n)?;
            let list = RankedList::personalized(user, entries);
            let path = write_ranked_list(&list, &out.join(format!("rerank_u{user}")), format)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::GroupRecommend {
            source,
            group,
            strategy,
            candidates,
            n,
            format,
            aggregate,
            tau,
            predict_item,
            min_raters,
        } => {
            let n = positive("--n", n)?;
            let strategy = parse_strategy(&strategy)?;
            let dataset = load_dataset(&source)?;
            let group = load_group(&groups_dir(&out), &group)?;
            let pool = read_candidates(&candidates, &dataset)?;
            let list = recommend_for_group(&group, &dataset, &pool, strategy, n)?;
            match list.effective_profile {
                Some(EffectiveProfile::Member(member)) => {
                    println!("effective profile: member {member}");
                }
                Some(EffectiveProfile::GroupAverage) => println!("effective profile: group average"),
                None => {}
            }
            let base = out.join(format!("group_{}_{}", group.group_id, strategy_slug(strategy)));
            let path = write_ranked_list(&list, &base, format)?;
            println!("wrote {}", path.display());

            if let Some(function) = aggregate.as_deref() {
                let function = parse_aggregation(function, tau)?;
                let item_ids: Vec<u64> = pool.iter().map(|c| c.item_id).collect();
                let slice = GroupRatingsSlice::from_dataset(&dataset, &group.members, &item_ids)?;
                let outcome = aggregate_ratings(&slice, function)?;
                for (item_id, score) in &outcome.scores {
                    println!("aggregated {item_id}: {score}");
                }
                if !outcome.ineligible.is_empty() {
                    let ids: Vec<String> =
                        outcome.ineligible.iter().map(u64::to_string).collect();
                    println!("ineligible (unrated by some member): {}", ids.join(","));
                }
            }
            if let Some(item_id) = predict_item {
                let predicted = predict_group_item_rating(
                    &group.members,
                    item_id,
                    &dataset,
                    min_raters as usize,
                )?;
                println!("predicted rating for item {item_id}: {predicted}");
            }
            Ok(())
        }
        Command::Simulcast {
            source,
            g,
            m,
            candidates,
            n,
        } => {
            let g = positive("--g", g)?;
            let m = positive("--m", m)?;
            let n = positive("--n", n)?;
            let dataset = load_dataset(&source)?;
            let pool = read_candidates(&candidates, &dataset)?;
            let groups = form_ssg(&dataset, g, m)?;
            let lists = broadcast(&groups, &dataset, &pool, n)?;
            let dir = out.join("broadcast");
            let paths = write_broadcast_dir(&lists, &dir).map_err(|source| CliError::Io {
                path: dir.clone(),
                source,
            })?;
            println!("wrote {} group files to {}", paths.len(), dir.display());
            Ok(())
        }
        Command::Bench {
            users,
            items,
            ratings_per_user,
            m,
            n,
            seed,
        } => {
            let users = positive("--users", users)?;
            let items = positive("--items", items)?;
            let ratings_per_user = positive("--ratings-per-user", ratings_per_user)?;
            let m = positive("--m", m)?;
            let n = positive("--n", n)?;
            run_bench(users, items, ratings_per_user, m, n, seed, &out)
        }
    }
}

fn run_group(action: GroupAction, dir: &Path) -> Result<(), CliError> {
    let mut store = MultiGroupStore::load_dir(dir)?;
    match action {
        GroupAction::Create {
            name,
            owner,
            visibility,
            members,
        } => {
            let visibility = parse_visibility(&visibility)?;
            let group_id = store.create(&name, owner, visibility).group_id.clone();
            for user in members {
                if user != owner {
                    store.add_member(&group_id, owner, user)?;
                }
            }
            store.save_dir(dir)?;
            let group = store.get(&group_id).expect("just created");
            println!("created {}", group.group_id);
            print!("{}", group.to_json());
            Ok(())
        }
        GroupAction::Add { group, actor, user } => {
            store.add_member(&group, actor, user)?;
            store.save_dir(dir)?;
            println!("added user {user} to {group}");
            Ok(())
        }
        GroupAction::Remove { group, actor, user } => {
            let outcome = store.remove_member(&group, actor, user)?;
            store.save_dir(dir)?;
            match outcome {
                RemoveOutcome::MemberRemoved => println!("removed user {user} from {group}"),
                RemoveOutcome::GroupDeleted => {
                    // removing the owner dissolves the group; its file stays
                    // deleted because save_dir rewrites the directory
                    println!("removed owner {user}; group {group} deleted");
                }
            }
            Ok(())
        }
        GroupAction::List => {
            for group in store.groups() {
                let line = serde_json::to_string(group).expect("group serializes");
                println!("{line}");
            }
            Ok(())
        }
    }
}

/// Compare making one list per user against making one list per disjoint
/// group plus a per-member rerank of the shared list.
fn run_bench(
    users: usize,
    items: usize,
    ratings_per_user: usize,
    m: usize,
    n: usize,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let dataset = affectrec::ingest::synth_dataset(seed, users, items, ratings_per_user);
    let pool: Vec<Candidate> = dataset
        .items()
        .enumerate()
        .map(|(index, item)| Candidate {
            item_id: item.item_id(),
            mvec: *item.mvec(),
            display_rank: index as u32 + 1,
            title: None,
        })
        .collect();

    // personalized: one generation per user over the full pool
    take_aii_evaluations();
    let personalized_start = Instant::now();
    let mut generations_personalized: u64 = 0;
    for user in dataset.users() {
        rerank(user.profile().uvec(), &pool, n)?;
        generations_personalized += 1;
    }
    let personalized_elapsed = personalized_start.elapsed();
    let evals_personalized = take_aii_evaluations();

    // grouped: one generation per group, then each member reranks the
    // shared n-item list
    let grouped_start = Instant::now();
    let groups = form_ssg_disjoint(&dataset, m)?;
    let mut generations_grouped: u64 = 0;
    for group in &groups {
        let anchor_uvec: EmotionVector = *dataset
            .user_profile(group.anchor)
            .expect("anchor comes from the dataset")
            .uvec();
        let shared = rerank(&anchor_uvec, &pool, n)?;
        generations_grouped += 1;
        let shared_pool: Vec<Candidate> = shared
            .iter()
            .enumerate()
            .map(|(index, entry)| Candidate {
                item_id: entry.item_id,
                mvec: *dataset
                    .item(entry.item_id)
                    .expect("entry came from the pool")
                    .mvec(),
                display_rank: index as u32 + 1,
                title: entry.title.clone(),
            })
            .collect();
        for member in group.members() {
            let profile = dataset
                .user_profile(member.user_id)
                .expect("member comes from the dataset");
            rerank(profile.uvec(), &shared_pool, n)?;
        }
    }
    let grouped_elapsed = grouped_start.elapsed();
    let evals_grouped = take_aii_evaluations();

    let report = BenchReport {
        n_users: users as u64,
        m: m as u64,
        groups_formed: groups.len() as u64,
        topn_generations_personalized: generations_personalized,
        topn_generations_grouped: generations_grouped,
        reduction_factor: generations_personalized as f64 / generations_grouped as f64,
        aii_evaluations_personalized: evals_personalized,
        aii_evaluations_grouped: evals_grouped,
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    let path = out.join("bench.json");
    write_file(&path, json.as_bytes())?;

    eprintln!("personalized phase: {:.3} ms", personalized_elapsed.as_secs_f64() * 1e3);
    eprintln!("grouped phase: {:.3} ms", grouped_elapsed.as_secs_f64() * 1e3);
    println!(
        "personalized={} grouped={} reduction_factor={}",
        report.topn_generations_personalized,
        report.topn_generations_grouped,
        report.reduction_factor
    );
    println!("wrote {}", path.display());
    Ok(())
}
