use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::Path;

use serde_json::json;

use semdex::corpus;
use semdex::embed::{self, EmbeddingModel};
use semdex::semindex::topic_index;
use semdex::semnet::{
    build_graph, centrality_index_e, centrality_index_edot, centrality_index_for, density_index,
    eigenvector_centrality, filter_graph, CentralityVector, FilterConfig, SemanticGraph, SemnetError,
};
use semdex::series::IndexSeries;
use semdex::votes::{load_votes, yearly_correlation};
use semdex::DocumentSpace;

use crate::config::{PipelineConfig, YearSpan};
use crate::error::CliError;
use crate::output::{num, Run};

fn require(path: &Path, what: &str, hint: &str) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Input(format!("{what} {} not found; {hint}", path.display())))
    }
}

fn load_model(cfg: &PipelineConfig) -> Result<EmbeddingModel, CliError> {
    let path = cfg.resolve(&cfg.model_path);
    require(&path, "model file", "run `semdex train` first")?;
    embed::load_model(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Corpus years, narrowed to `span` when given.
fn year_range(space: &DocumentSpace, span: Option<YearSpan>) -> Result<RangeInclusive<i32>, CliError> {
    let (Some(first), Some(last)) = (space.years().next(), space.years().last()) else {
        return Err(CliError::Input("the model holds no country-year documents".into()));
    };
    let (lo, hi) = match span {
        Some([a, b]) => (a.max(first), b.min(last)),
        None => (first, last),
    };
    if lo > hi {
        return Err(CliError::Usage(format!(
            "requested years {span:?} do not overlap the corpus years {first}-{last}"
        )));
    }
    Ok(lo..=hi)
}

fn check_base_year(space: &DocumentSpace, kind: &str, year: i32) -> Result<(), CliError> {
    if space.countries(year).is_some() {
        return Ok(());
    }
    let first = space.years().next().unwrap_or_default();
    let last = space.years().last().unwrap_or_default();
    Err(CliError::Usage(format!(
        "{kind} base year {year} has no documents (corpus covers {first}-{last})"
    )))
}

pub fn preprocess(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut run = Run::new("preprocess", cfg);
    let dir = cfg.resolve(&cfg.corpus_dir);
    let raw = corpus::ingest_corpus(&dir).map_err(|e| CliError::Input(e.to_string()))?;
    if raw.is_empty() {
        return Err(CliError::Input(format!("no documents found in {}", dir.display())));
    }
    let docs = corpus::preprocess_all(&raw);
    let stats = corpus::corpus_stats(&docs);
    let vocab = corpus::build_vocabulary(&docs, cfg.min_count).map_err(|e| CliError::Usage(e.to_string()))?;

    let path = cfg.resolve(&cfg.processed_path);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", parent.display())))?;
    }
    corpus::write_processed(&path, &docs)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    let bytes = std::fs::read(&path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    run.record(&path, &bytes);

    println!("documents: {}", stats.documents);
    println!("mean unique tokens per document: {:.1}", stats.mean_unique_tokens);
    println!("vocabulary size (min_count {}): {}", cfg.min_count, vocab.len());
    run.finish(json!({
        "documents": stats.documents,
        "mean_unique_tokens": stats.mean_unique_tokens,
        "vocabulary_size": vocab.len(),
    }))?;
    Ok(())
}

pub fn train(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut run = Run::new("train", cfg);
    let processed = cfg.resolve(&cfg.processed_path);
    require(&processed, "processed corpus", "run `semdex preprocess` first")?;
    let docs = corpus::read_processed(&processed).map_err(|e| CliError::Input(e.to_string()))?;
    let vocab = corpus::build_vocabulary(&docs, cfg.min_count).map_err(|e| CliError::Usage(e.to_string()))?;
    log::info!(
        "training on {} documents, vocabulary {}, dim {}, {} epochs",
        docs.len(),
        vocab.len(),
        cfg.training.dim,
        cfg.training.epochs
    );
    let start = std::time::Instant::now();
    let model = embed::train(&docs, &vocab, &cfg.training).map_err(CliError::compute)?;
    log::info!("training finished in {:.1?}", start.elapsed());

    let path = cfg.resolve(&cfg.model_path);
    run.write(&path, &embed::write_model(&model))?;
    println!("model: {} words, {} documents, dim {}", model.vocab.len(), model.vocab.doc_labels.len(), model.dim);
    run.finish(json!({
        "documents": docs.len(),
        "vocabulary_size": model.vocab.len(),
        "dim": model.dim,
    }))?;
    Ok(())
}

fn series_name(cfg: &PipelineConfig, group: &str, theme: &str) -> String {
    if cfg.topic_groups.len() == 1 {
        theme.to_string()
    } else {
        format!("{group}/{theme}")
    }
}

pub fn topic(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut run = Run::new("topic", cfg);
    let model = load_model(cfg)?;
    let space = DocumentSpace::new(&model, cfg.aliases.clone());
    let years = year_range(&space, cfg.years)?;
    let base = cfg.base_years.topic;
    check_base_year(&space, "topic", base)?;

    let mut csv = run.csv(&["name", "year", "value", "effective_n"]);
    let mut names = Vec::new();
    for group in &cfg.topic_groups {
        for theme in cfg.stemmed_themes() {
            let series = topic_index(&space, group, &theme, base, years.clone()).map_err(CliError::compute)?;
            let name = series_name(cfg, &group.name, &theme.name);
            for (year, value) in &series.points {
                csv.row(&[name.clone(), year.to_string(), num(*value), series.effective_n[year].to_string()]);
            }
            names.push(name);
        }
    }
    let path = cfg.resolve(&cfg.output_dir).join("topic.csv");
    run.write(&path, &csv.into_bytes())?;
    println!("wrote {} topic series to {}", names.len(), path.display());
    run.finish(json!({ "series": names, "base_year": base }))?;
    Ok(())
}

/// Unfiltered graphs for every year in `years` that has at least two
/// countries.
fn graphs(space: &DocumentSpace, years: RangeInclusive<i32>) -> Result<Vec<SemanticGraph>, CliError> {
    let mut out = Vec::new();
    for year in years {
        match build_graph(space, year) {
            Ok(g) => out.push(g),
            Err(SemnetError::TooFewNodes { count, .. }) => {
                if count > 0 {
                    log::warn!("{year}: only {count} country; no graph");
                }
            }
            Err(e) => return Err(CliError::compute(e)),
        }
    }
    Ok(out)
}

fn filtered(graphs: &[SemanticGraph], filter: &FilterConfig) -> Result<Vec<SemanticGraph>, CliError> {
    graphs.iter().map(|g| filter_graph(g, filter).map_err(CliError::compute)).collect()
}

fn series_rows(csv: &mut crate::output::Csv, series: &IndexSeries, by_year: &BTreeMap<i32, &SemanticGraph>) {
    for (year, value) in &series.points {
        let g = by_year[year];
        csv.row(&[
            series.name.clone(),
            year.to_string(),
            num(*value),
            g.node_count().to_string(),
            g.edge_count().to_string(),
        ]);
    }
}

pub fn density(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut run = Run::new("density", cfg);
    let model = load_model(cfg)?;
    let space = DocumentSpace::new(&model, cfg.aliases.clone());
    let years = year_range(&space, cfg.years)?;
    let base = cfg.base_years.density;
    check_base_year(&space, "density", base)?;

    let raw = graphs(&space, years)?;
    let full = filtered(&raw, &cfg.filter)?;
    let partial = filtered(
        &raw,
        &FilterConfig {
            apply_threshold: false,
            ..cfg.filter.clone()
        },
    )?;

    let mut csv = run.csv(&["name", "year", "value", "n_nodes", "n_edges"]);
    for (name, gs) in [("density_filtered", &full), ("density_percentile_only", &partial)] {
        let series = density_index(gs, base, name).map_err(CliError::compute)?;
        let by_year = gs.iter().map(|g| (g.year, g)).collect();
        series_rows(&mut csv, &series, &by_year);
    }
    let path = cfg.resolve(&cfg.output_dir).join("density.csv");
    run.write(&path, &csv.into_bytes())?;
    println!("wrote density series for {} years to {}", full.len(), path.display());
    run.finish(json!({
        "series": ["density_filtered", "density_percentile_only"],
        "base_year": base,
        "years": full.len(),
    }))?;
    Ok(())
}

fn centralities(graphs: &[SemanticGraph]) -> Result<BTreeMap<i32, CentralityVector>, CliError> {
    let mut out = BTreeMap::new();
    for g in graphs {
        let cv = eigenvector_centrality(g).map_err(CliError::compute)?;
        if cv.empty_graph {
            log::warn!("{}: filtered graph has no edges; centrality undefined", g.year);
            continue;
        }
        out.insert(g.year, cv);
    }
    Ok(out)
}

pub fn centrality(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut run = Run::new("centrality", cfg);
    let model = load_model(cfg)?;
    let space = DocumentSpace::new(&model, cfg.aliases.clone());
    let years = year_range(&space, cfg.years)?;
    let e_years = match cfg.e_years {
        Some(span) => year_range(&space, Some(span))?,
        None => years.clone(),
    };
    let base = cfg.base_years.edot;
    check_base_year(&space, "edot", base)?;

    let lo = (*years.start()).min(*e_years.start());
    let hi = (*years.end()).max(*e_years.end());
    let graphs = filtered(&graphs(&space, lo..=hi)?, &cfg.filter)?;
    let by_year: BTreeMap<i32, &SemanticGraph> = graphs.iter().map(|g| (g.year, g)).collect();
    let cvs = centralities(&graphs)?;

    let mut csv = run.csv(&["name", "year", "value", "n_nodes", "n_edges"]);
    let mut names = Vec::new();
    for group in &cfg.groups {
        let mut series = IndexSeries {
            name: group.name.clone(),
            base_year: base,
            points: BTreeMap::new(),
            effective_n: BTreeMap::new(),
        };
        for (&year, cv) in cvs.range(e_years.clone()) {
            match centrality_index_e(cv, group, &space) {
                Ok(e) => {
                    series.points.insert(year, e.value);
                    series.effective_n.insert(year, e.members_present);
                }
                Err(err @ SemnetError::NoMembers(_)) => log::warn!("{year}: {err}"),
                Err(err) => return Err(CliError::compute(err)),
            }
        }
        series_rows(&mut csv, &series, &by_year);
        names.push(group.name.clone());
    }

    for country in &cfg.edot_countries {
        let canonical = cfg.aliases.canonical(country);
        let mut e = IndexSeries {
            name: country.clone(),
            base_year: base,
            points: BTreeMap::new(),
            effective_n: BTreeMap::new(),
        };
        for (&year, cv) in cvs.range(years.clone()) {
            if let Some(value) = cv.get(canonical) {
                let gc = centrality_index_for(cv, &[value], country).map_err(CliError::compute)?;
                e.points.insert(year, gc.value);
                e.effective_n.insert(year, 1);
            }
        }
        let name = format!("edot_{country}");
        let edot = centrality_index_edot(&e, base, &name)
            .map_err(|err| CliError::Compute(format!("{name}: {err}")))?;
        series_rows(&mut csv, &edot, &by_year);
        names.push(name);
    }

    let path = cfg.resolve(&cfg.output_dir).join("centrality.csv");
    run.write(&path, &csv.into_bytes())?;
    println!("wrote {} centrality series to {}", names.len(), path.display());
    run.finish(json!({
        "series": names,
        "edot_base_year": base,
        "unconverged_years": cvs.values().filter(|c| !c.converged).map(|c| c.year).collect::<Vec<_>>(),
    }))?;
    Ok(())
}

pub fn correlate(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut run = Run::new("correlate", cfg);
    let Some(votes_path) = cfg.votes_path.as_ref() else {
        return Err(CliError::Usage("correlate needs `votes_path` in the config".into()));
    };
    let votes_path = cfg.resolve(votes_path);
    require(&votes_path, "votes file", "point `votes_path` at a year,country_code,agreement CSV")?;
    let votes = load_votes(&votes_path).map_err(|e| CliError::Input(e.to_string()))?;
    let model = load_model(cfg)?;
    let space = DocumentSpace::new(&model, cfg.aliases.clone());
    let years = year_range(&space, cfg.years)?;

    let points = yearly_correlation(&space, &votes, &cfg.reference_country, years).map_err(CliError::compute)?;
    let mut csv = run.csv(&["year", "rho", "n"]);
    for p in &points {
        csv.row(&[p.year.to_string(), num(p.rho), p.n.to_string()]);
    }
    let path = cfg.resolve(&cfg.output_dir).join("correlation.csv");
    run.write(&path, &csv.into_bytes())?;
    println!("wrote {} yearly correlations to {}", points.len(), path.display());
    run.finish(json!({ "years": points.len(), "reference_country": cfg.reference_country }))?;
    Ok(())
}

pub fn export_graph(cfg: &PipelineConfig) -> Result<(), CliError> {
    let mut run = Run::new("export-graph", cfg);
    let model = load_model(cfg)?;
    let space = DocumentSpace::new(&model, cfg.aliases.clone());
    let years = year_range(&space, cfg.years)?;
    let graphs = filtered(&graphs(&space, years)?, &cfg.filter)?;
    let dir = cfg.resolve(&cfg.output_dir).join("graphs");
    let mut edges = 0;
    for g in &graphs {
        let mut csv = run.csv(&["country_a", "country_b", "weight"]);
        for e in &g.edges {
            csv.row(&[g.nodes[e.a].clone(), g.nodes[e.b].clone(), num(e.weight)]);
        }
        edges += g.edge_count();
        run.write(&dir.join(format!("{}.csv", g.year)), &csv.into_bytes())?;
    }
    println!("wrote {} graphs ({edges} edges) to {}", graphs.len(), dir.display());
    run.finish(json!({ "graphs": graphs.len(), "edges": edges }))?;
    Ok(())
}
