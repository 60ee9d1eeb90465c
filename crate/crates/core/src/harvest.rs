//! Page-text extraction, per-site union and fetch throttling over local
//! HTML collections. Nothing here touches the network.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Default throttling bandwidth: 1 MiB/s.
pub const DEFAULT_BANDWIDTH: f64 = 1024.0 * 1024.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Page {
    pub page_id: String,
    pub html: String,
    pub size_bytes: u64,
}

impl Page {
    pub fn new(page_id: impl Into<String>, html: impl Into<String>) -> Self {
        let html = html.into();
        Page { page_id: page_id.into(), size_bytes: html.len() as u64, html }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageSet {
    pub site_id: String,
    pages: Vec<Page>,
}

impl PageSet {
    pub fn new(site_id: impl Into<String>, pages: Vec<Page>) -> Result<Self> {
        let mut ids = HashSet::new();
        for p in &pages {
            if !ids.insert(p.page_id.as_str()) {
                return Err(Error::Validation(format!("duplicate page id `{}`", p.page_id)));
            }
        }
        Ok(PageSet { site_id: site_id.into(), pages })
    }

    pub fn pages(&self) -> &[Page] {
        &self.pages
    }

    pub fn total_size(&self) -> u64 {
        self.pages.iter().map(|p| p.size_bytes).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrottleConfig {
    bandwidth: f64,
}

impl ThrottleConfig {
    /// `bandwidth` in bytes per second.
    pub fn new(bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::Config(format!("bandwidth must be positive, got {bandwidth}")));
        }
        Ok(ThrottleConfig { bandwidth })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
}

impl Default for ThrottleConfig {
    fn default() -> Self {
        ThrottleConfig { bandwidth: DEFAULT_BANDWIDTH }
    }
}

const BLOCK_TAGS: &[&str] = &[
    "address",
    "article",
    "aside",
    "blockquote",
    "body",
    "br",
    "caption",
    "dd",
    "div",
    "dl",
    "dt",
    "figcaption",
    "figure",
    "footer",
    "form",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "head",
    "header",
    "hr",
    "html",
    "li",
    "main",
    "nav",
    "ol",
    "option",
    "p",
    "pre",
    "section",
    "table",
    "tbody",
    "td",
    "tfoot",
    "th",
    "thead",
    "title",
    "tr",
    "ul",
];

/// Elements whose content is never visible text.
const SKIPPED_TAGS: &[&str] = &["script", "style", "noscript", "template"];

fn looks_binary(html: &str) -> bool {
    if html.contains('\0') {
        return true;
    }
    let total = html.chars().count();
    let controls = html.chars().filter(|c| c.is_control() && !c.is_whitespace()).count();
    total > 0 && controls * 10 > total
}

fn find_ci(haystack: &str, needle: &str) -> Option<usize> {
    haystack.as_bytes().windows(needle.len()).position(|w| w.eq_ignore_ascii_case(needle.as_bytes()))
}

/// End of a tag starting at `s[0] == '<'`, skipping quoted attribute values.
fn tag_end(s: &str) -> usize {
    let mut quote: Option<u8> = None;
    for (i, &b) in s.as_bytes().iter().enumerate().skip(1) {
        match quote {
            Some(q) if b == q => quote = None,
            Some(_) => {}
            None if b == b'"' || b == b'\'' => quote = Some(b),
            None if b == b'>' => return i + 1,
            None => {}
        }
    }
    s.len()
}

fn flush(buf: &mut String, out: &mut Vec<String>) {
    if !buf.is_empty() {
        let decoded = html_escape::decode_html_entities(buf.as_str());
        let block = decoded.split_whitespace().collect::<Vec<_>>().join(" ");
        if !block.is_empty() {
            out.push(block);
        }
        buf.clear();
    }
}

/// Visible text blocks in document order, one per block-level element.
///
/// Malformed markup is tolerated: a `<` that does not open a tag is text,
/// and an unterminated comment or skipped element runs to the end.
pub fn extract_page(html: &str) -> Vec<String> {
    if looks_binary(html) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut rest = html;
    while let Some(lt) = rest.find('<') {
        buf.push_str(&rest[..lt]);
        rest = &rest[lt..];
        if rest.starts_with("<!--") {
            rest = rest[4..].find("-->").map_or("", |e| &rest[4 + e + 3..]);
            continue;
        }
        let after = &rest[1..];
        let closing = after.starts_with('/');
        let name_start = usize::from(closing);
        let name_len =
            after[name_start..].find(|c: char| !c.is_ascii_alphanumeric()).unwrap_or(after.len() - name_start);
        let is_markup = after.starts_with('!') || after.starts_with('?');
        if name_len == 0 && !is_markup {
            buf.push('<');
            rest = after;
            continue;
        }
        let end = tag_end(rest);
        let name = after[name_start..name_start + name_len].to_ascii_lowercase();
        let self_closing = rest[..end].ends_with("/>");
        rest = &rest[end..];
        if is_markup {
            continue;
        }
        if !closing && !self_closing && SKIPPED_TAGS.contains(&name.as_str()) {
            rest = match find_ci(rest, &format!("</{name}")) {
                Some(i) => &rest[i + tag_end(&rest[i..])..],
                None => "",
            };
            continue;
        }
        if BLOCK_TAGS.contains(&name.as_str()) {
            flush(&mut buf, &mut out);
        }
    }
    buf.push_str(rest);
    flush(&mut buf, &mut out);
    out
}

/// Union of the page extractions in first-seen order.
pub fn scrape_site(site: &PageSet) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for page in site.pages() {
        for block in extract_page(&page.html) {
            if seen.insert(block.clone()) {
                out.push(block);
            }
        }
    }
    out
}

/// Mean over sites of `size / bandwidth`, in seconds.
pub fn throttle_delay(site_sizes: &[u64], cfg: &ThrottleConfig) -> Result<f64> {
    if site_sizes.is_empty() {
        return Err(Error::Domain("throttle delay is undefined for zero sites".into()));
    }
    let sum: f64 = site_sizes.iter().map(|&s| s as f64 / cfg.bandwidth).sum();
    Ok(sum / site_sizes.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledFetch {
    pub site_id: String,
    pub page_id: String,
    pub start: f64,
}

/// Round-robin over sites, one fetch every Δt seconds, where Δt comes from
/// the sites' current total sizes.
pub fn schedule_fetch(sites: &[PageSet], cfg: &ThrottleConfig) -> Result<Vec<ScheduledFetch>> {
    let sizes: Vec<u64> = sites.iter().map(PageSet::total_size).collect();
    let dt = throttle_delay(&sizes, cfg)?;
    let rounds = sites.iter().map(|s| s.pages().len()).max().unwrap_or(0);
    let mut plan = Vec::new();
    for r in 0..rounds {
        for site in sites {
            if let Some(page) = site.pages().get(r) {
                plan.push(ScheduledFetch {
                    site_id: site.site_id.clone(),
                    page_id: page.page_id.clone(),
                    start: plan.len() as f64 * dt,
                });
            }
        }
    }
    Ok(plan)
}

/// Schedule as TSV rows `<site>/<page>\t<start_seconds>`.
pub fn render_schedule(plan: &[ScheduledFetch]) -> String {
    let mut out = String::new();
    for f in plan {
        let _ = writeln!(out, "{}/{}\t{}", f.site_id, f.page_id, f.start);
    }
    out
}

/// Reads a `<site_id>/<page_id>.html` tree; sites and pages in name order.
pub fn load_page_sets(dir: impl AsRef<Path>) -> Result<Vec<PageSet>> {
    let mut site_dirs: Vec<_> =
        fs::read_dir(dir)?.collect::<std::io::Result<Vec<_>>>()?.into_iter().filter(|e| e.path().is_dir()).collect();
    site_dirs.sort_by_key(|e| e.file_name());
    let mut sites = Vec::new();
    for site in site_dirs {
        let mut files: Vec<_> = fs::read_dir(site.path())?
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "html"))
            .collect();
        files.sort();
        let pages = files
            .iter()
            .map(|p| {
                let bytes = fs::read(p)?;
                let id = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                Ok(Page::new(id, String::from_utf8_lossy(&bytes).into_owned()))
            })
            .collect::<Result<Vec<_>>>()?;
        sites.push(PageSet::new(site.file_name().to_string_lossy(), pages)?);
    }
    Ok(sites)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bw(b: f64) -> ThrottleConfig {
        ThrottleConfig::new(b).unwrap()
    }

    fn site(id: &str, pages: &[(&str, &str)]) -> PageSet {
        PageSet::new(id, pages.iter().map(|(p, h)| Page::new(*p, *h)).collect()).unwrap()
    }

    #[test]
    fn extraction_examples() {
        assert_eq!(extract_page("<p>hi</p><p>there</p>"), vec!["hi", "there"]);
        assert_eq!(extract_page("<script>x=1</script><p>ok</p>"), vec!["ok"]);
        assert!(extract_page("").is_empty());
    }

    #[test]
    fn extraction_details() {
        assert_eq!(
            extract_page("<div>a <b>bold</b>  word</div><!-- <p>gone</p> --><li>x &amp; y&nbsp;z</li>"),
            vec!["a bold word", "x & y z"]
        );
        assert_eq!(extract_page("<STYLE>p{}</style>1 < 2<br/>3"), vec!["1 < 2", "3"]);
        assert_eq!(extract_page("<p title=\"a>b\">t</p>"), vec!["t"]);
        assert_eq!(extract_page("<h2>नमस्ते दुनिया</h2>"), vec!["नमस्ते दुनिया"]);
        assert_eq!(extract_page("<p>open<script>never closed"), vec!["open"]);
        assert!(extract_page("\0\u{1}\u{2}binary").is_empty());
    }

    #[test]
    fn union_examples() {
        let s = site("w", &[("1", "<p>hi</p>"), ("2", "<p>hi</p>")]);
        assert_eq!(scrape_site(&s), vec!["hi"]);
        let s = site("w", &[("1", "<p>a</p><p>b</p>"), ("2", "<p>b</p><p>c</p>")]);
        assert_eq!(scrape_site(&s), vec!["a", "b", "c"]);
        assert!(scrape_site(&site("w", &[])).is_empty());
        assert!(PageSet::new("w", vec![Page::new("1", ""), Page::new("1", "")]).is_err());
    }

    #[test]
    fn delay_examples() {
        assert_eq!(throttle_delay(&[1000], &bw(1000.0)).unwrap(), 1.0);
        assert_eq!(throttle_delay(&[2000, 4000], &bw(1000.0)).unwrap(), 3.0);
        assert_eq!(throttle_delay(&[0, 0], &bw(7.0)).unwrap(), 0.0);
        assert!(matches!(throttle_delay(&[], &bw(1.0)), Err(Error::Domain(_))));
        assert!(ThrottleConfig::new(0.0).is_err());
        assert_eq!(ThrottleConfig::default().bandwidth(), 1048576.0);
    }

    #[test]
    fn schedule_examples() {
        // One site of 1000 bytes at 1000 B/s gives Δt = 1.
        let html = "x".repeat(500);
        let s = site("a", &[("p1", &html), ("p2", &html)]);
        let plan = schedule_fetch(&[s], &bw(1000.0)).unwrap();
        assert_eq!(plan.iter().map(|f| f.start).collect::<Vec<_>>(), vec![0.0, 1.0]);

        let a = site("A", &[("1", ""), ("2", "")]);
        let b = site("B", &[("1", ""), ("2", "")]);
        let plan = schedule_fetch(&[a, b], &bw(1.0)).unwrap();
        assert_eq!(plan.iter().map(|f| f.site_id.as_str()).collect::<Vec<_>>(), ["A", "B", "A", "B"]);
        assert!(plan.iter().all(|f| f.start == 0.0));
        assert_eq!(render_schedule(&plan[..1]), "A/1\t0\n");
    }

    #[test]
    fn page_tree() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("b")).unwrap();
        fs::create_dir(dir.path().join("a")).unwrap();
        fs::write(dir.path().join("a/2.html"), "<p>two</p>").unwrap();
        fs::write(dir.path().join("a/1.html"), "<p>one</p>").unwrap();
        fs::write(dir.path().join("a/notes.txt"), "skip").unwrap();
        fs::write(dir.path().join("b/x.html"), [0xffu8, b'<', b'p', b'>']).unwrap();
        let sites = load_page_sets(dir.path()).unwrap();
        assert_eq!(sites.len(), 2);
        assert_eq!(sites[0].pages().iter().map(|p| p.page_id.as_str()).collect::<Vec<_>>(), ["1", "2"]);
        assert_eq!(scrape_site(&sites[0]), vec!["one", "two"]);
    }

    proptest! {
        #[test]
        fn delay_is_linear(sizes in prop::collection::vec(0u64..1_000_000, 1..8), k in 1u64..16, b in 1.0f64..1e6) {
            let base = throttle_delay(&sizes, &bw(b)).unwrap();
            let scaled: Vec<u64> = sizes.iter().map(|s| s * k).collect();
            prop_assert!((throttle_delay(&scaled, &bw(b)).unwrap() - k as f64 * base).abs() <= 1e-9 * base.max(1.0) * k as f64);
            prop_assert!((throttle_delay(&sizes, &bw(2.0 * b)).unwrap() - base / 2.0).abs() <= 1e-12 * base.max(1.0));
        }

        #[test]
        fn union_bounded_by_block_count(pages in prop::collection::vec(prop::collection::vec("[a-d]{1,2}", 0..5), 0..5)) {
            let ps: Vec<Page> = pages.iter().enumerate()
                .map(|(i, blocks)| Page::new(i.to_string(), blocks.iter().map(|b| format!("<p>{b}</p>")).collect::<String>()))
                .collect();
            let total: usize = pages.iter().map(Vec::len).sum();
            let union = scrape_site(&PageSet::new("s", ps).unwrap());
            prop_assert!(union.len() <= total);
            let distinct: HashSet<&String> = pages.iter().flatten().collect();
            prop_assert_eq!(union.len(), distinct.len());
        }

        #[test]
        fn extraction_is_total(s in ".{0,200}") {
            for block in extract_page(&s) {
                prop_assert!(!block.is_empty());
                prop_assert_eq!(block.trim(), block.as_str());
            }
        }

        #[test]
        fn schedule_non_decreasing(counts in prop::collection::vec(0usize..4, 1..4)) {
            let sites: Vec<PageSet> = counts.iter().enumerate()
                .map(|(i, &n)| site(&i.to_string(), &(0..n).map(|p| (["a", "b", "c", "d"][p], "<p>x</p>")).collect::<Vec<_>>()))
                .collect();
            let plan = schedule_fetch(&sites, &bw(3.0)).unwrap();
            prop_assert_eq!(plan.len(), counts.iter().sum::<usize>());
            prop_assert!(plan.windows(2).all(|w| w[0].start <= w[1].start));
        }
    }
}
