//! Deterministic report documents: stable key order, rendered scalars, and
//! a fixed-layout text form. A report alone carries everything needed to
//! reproduce the run: tool version, input digest, field mode, options, every
//! verdict with margin and witness, and the audit list.

use serde::Serialize;
use sha2::{Digest, Sha256};

use wco::classify::{
    AltLocation, AltVerdict, AuditResult, ClassificationReport, DomainInvariance,
};
use wco::oracle::OracleReport;
use wco::scalar::Scalar;

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo {
            name: "wco",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputInfo {
    pub digest: String,
    pub kind: String,
    pub field: String,
}

pub fn digest_of(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    let hex: String = out.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

#[derive(Debug, Clone, Serialize)]
pub struct OptionsInfo {
    pub max_order: usize,
    pub alt_shifts: usize,
    pub alt_depth: usize,
    pub tolerance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DenseInfo {
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_atom: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceInfo {
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_star: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attained_atom: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderInfo {
    pub order: usize,
    pub isometry: bool,
    pub expansive: bool,
    pub margin: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_atom: Option<usize>,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AltEntryInfo {
    pub location: String,
    pub verdict: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlternatingInfo {
    pub shifts: usize,
    pub depth: usize,
    pub pass: bool,
    pub entries: Vec<AltEntryInfo>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditInfo {
    pub rule: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyDocument {
    pub tool: ToolInfo,
    pub input: InputInfo,
    pub options: OptionsInfo,
    pub densely_defined: DenseInfo,
    pub blocked: bool,
    pub domain_invariant: InvarianceInfo,
    pub orders: Vec<OrderInfo>,
    pub hyperexpansive_up_to: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub completely_alternating: Option<AlternatingInfo>,
    pub audits: Vec<AuditInfo>,
    pub findings: Vec<String>,
}

pub fn classify_document<K: Scalar>(
    input: InputInfo,
    options: OptionsInfo,
    report: &ClassificationReport<K>,
    audits: &[AuditResult],
    extra_findings: Vec<String>,
) -> ClassifyDocument {
    let mut findings = extra_findings;
    for audit in audits {
        if !audit.passed {
            findings.push(format!("VIOLATION {}: {}", audit.rule, audit.detail));
        }
    }
    ClassifyDocument {
        tool: ToolInfo::current(),
        input,
        options,
        densely_defined: DenseInfo {
            verdict: report.densely_defined.verdict,
            witness_atom: report.densely_defined.witness,
        },
        blocked: report.blocked,
        domain_invariant: match &report.domain_invariance {
            DomainInvariance::Yes { c_star, attained } => InvarianceInfo {
                verdict: "yes".into(),
                c_star: Some(c_star.render()),
                attained_atom: *attained,
                detail: None,
            },
            DomainInvariance::No { detail } => InvarianceInfo {
                verdict: "no".into(),
                c_star: None,
                attained_atom: None,
                detail: Some(detail.clone()),
            },
            DomainInvariance::Blocked => InvarianceInfo {
                verdict: "blocked".into(),
                c_star: None,
                attained_atom: None,
                detail: None,
            },
        },
        orders: report
            .orders
            .iter()
            .map(|v| OrderInfo {
                order: v.order,
                isometry: v.isometry,
                expansive: v.expansive,
                margin: v.margin.render(),
                worst_atom: v.worst,
                within_tolerance: v.fuzzy,
            })
            .collect(),
        hyperexpansive_up_to: report.hyperexpansive_up_to,
        completely_alternating: report.alternating.as_ref().map(|alt| AlternatingInfo {
            shifts: alt.shifts,
            depth: alt.depth,
            pass: alt.pass,
            entries: alt
                .entries
                .iter()
                .map(|e| AltEntryInfo {
                    location: match e.location {
                        AltLocation::Atom(k) => format!("atom {k}"),
                        AltLocation::Tail { from } => format!("tail from {from}"),
                    },
                    verdict: match &e.verdict {
                        AltVerdict::CertifiedAffine => "certified-affine".into(),
                        AltVerdict::PassedDepth => "passed-depth".into(),
                        AltVerdict::Failed {
                            shift,
                            depth,
                            value,
                            witness,
                        } => format!(
                            "failed at shift {shift} depth {depth}: sum = {} (atom {witness})",
                            value.render()
                        ),
                    },
                })
                .collect(),
        }),
        audits: audits
            .iter()
            .map(|a| AuditInfo {
                rule: a.rule.to_owned(),
                passed: a.passed,
                detail: a.detail.clone(),
            })
            .collect(),
        findings,
    }
}

impl ClassifyDocument {
    pub fn has_findings(&self) -> bool {
        !self.findings.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        push(&mut out, format!("{} {} classify report", self.tool.name, self.tool.version));
        push(&mut out, format!("input: {} ({}, {})", self.input.digest, self.input.kind, self.input.field));
        push(
            &mut out,
            format!(
                "options: max-order {}, alternating ({}, {}), tolerance {}",
                self.options.max_order,
                self.options.alt_shifts,
                self.options.alt_depth,
                self.options.tolerance
            ),
        );
        push(
            &mut out,
            match self.densely_defined.witness_atom {
                Some(w) => format!("densely defined: no (J_1 = inf at atom {w})"),
                None => format!(
                    "densely defined: {}",
                    if self.densely_defined.verdict { "yes" } else { "no" }
                ),
            },
        );
        if self.blocked {
            push(
                &mut out,
                "order verdicts: blocked (criteria presuppose a dense domain)".into(),
            );
        } else {
            let inv = &self.domain_invariant;
            let mut line = format!("domain invariant: {}", inv.verdict);
            if let Some(c) = &inv.c_star {
                line.push_str(&format!(" (c* = {c}"));
                match inv.attained_atom {
                    Some(k) => line.push_str(&format!(" at atom {k})")),
                    None => line.push_str(", approached along the tail)"),
                }
            } else if let Some(d) = &inv.detail {
                line.push_str(&format!(" ({d})"));
            }
            push(&mut out, line);
            for v in &self.orders {
                let status = if v.isometry {
                    "isometry"
                } else if v.expansive {
                    "expansive"
                } else {
                    "not expansive"
                };
                let mut line = format!("order {}: {} (margin {}", v.order, status, v.margin);
                match v.worst_atom {
                    Some(k) => line.push_str(&format!(" at atom {k})")),
                    None => line.push_str(", tail limit)"),
                }
                if v.within_tolerance {
                    line.push_str(" [within tolerance]");
                }
                push(&mut out, line);
            }
            push(
                &mut out,
                format!(
                    "hyperexpansive up to order {} (of {} tested)",
                    self.hyperexpansive_up_to, self.options.max_order
                ),
            );
            if let Some(alt) = &self.completely_alternating {
                push(
                    &mut out,
                    format!(
                        "completely alternating to depth ({}, {}): {}",
                        alt.shifts,
                        alt.depth,
                        if alt.pass { "pass" } else { "fail" }
                    ),
                );
                for e in &alt.entries {
                    push(&mut out, format!("  {}: {}", e.location, e.verdict));
                }
            }
        }
        if self.audits.is_empty() {
            push(&mut out, "audits: none applicable".into());
        } else {
            push(&mut out, "audits:".into());
            for a in &self.audits {
                push(
                    &mut out,
                    format!(
                        "  {}: {} ({})",
                        a.rule,
                        if a.passed { "pass" } else { "FAIL" },
                        a.detail
                    ),
                );
            }
        }
        if self.findings.is_empty() {
            push(&mut out, "findings: none".into());
        } else {
            push(&mut out, "findings:".into());
            for f in &self.findings {
                push(&mut out, format!("  {f}"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleOrderInfo {
    pub order: usize,
    pub expansive: bool,
    pub isometry: bool,
    pub diagonal: Vec<String>,
    pub gram_diagonal: bool,
    pub used_psd_fallback: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleDocument {
    pub tool: ToolInfo,
    pub input: InputInfo,
    pub max_order: usize,
    pub trials: usize,
    pub seed: u64,
    pub orders: Vec<OracleOrderInfo>,
    pub agreement_with_criteria: Vec<String>,
    pub theta_trial_failures: Vec<String>,
    pub findings: Vec<String>,
}

pub fn oracle_document<K: Scalar>(
    input: InputInfo,
    max_order: usize,
    report: &OracleReport<K>,
    agreement_failures: Vec<String>,
    extra_findings: Vec<String>,
) -> OracleDocument {
    let mut findings = extra_findings;
    for failure in &agreement_failures {
        findings.push(format!("ORACLE-MISMATCH {failure}"));
    }
    for failure in &report.trial_failures {
        findings.push(format!("ORACLE-MISMATCH {failure}"));
    }
    OracleDocument {
        tool: ToolInfo::current(),
        input,
        max_order,
        trials: report.trials,
        seed: report.seed,
        orders: report
            .orders
            .iter()
            .map(|v| OracleOrderInfo {
                order: v.order,
                expansive: v.expansive,
                isometry: v.isometry,
                diagonal: v.diagonal.iter().map(Scalar::render).collect(),
                gram_diagonal: v.gram_diagonal,
                used_psd_fallback: v.used_psd_fallback,
            })
            .collect(),
        agreement_with_criteria: agreement_failures,
        theta_trial_failures: report.trial_failures.clone(),
        findings,
    }
}

impl OracleDocument {
    pub fn has_findings(&self) -> bool {
        !self.findings.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{} {} oracle report\n",
            self.tool.name, self.tool.version
        ));
        out.push_str(&format!(
            "input: {} ({}, {})\n",
            self.input.digest, self.input.kind, self.input.field
        ));
        out.push_str(&format!(
            "max order {}, trials {}, seed {}\n",
            self.max_order, self.trials, self.seed
        ));
        for v in &self.orders {
            let status = if v.isometry {
                "isometry"
            } else if v.expansive {
                "expansive"
            } else {
                "not expansive"
            };
            out.push_str(&format!(
                "order {}: {} (diagonal [{}]{}{})\n",
                v.order,
                status,
                v.diagonal.join(", "),
                if v.gram_diagonal { "" } else { ", NOT DIAGONAL" },
                if v.used_psd_fallback {
                    ", via PSD fallback"
                } else {
                    ""
                },
            ));
        }
        if self.agreement_with_criteria.is_empty() {
            out.push_str("agreement with criteria: full\n");
        } else {
            out.push_str("agreement with criteria: MISMATCHES\n");
            for m in &self.agreement_with_criteria {
                out.push_str(&format!("  {m}\n"));
            }
        }
        out.push_str(&format!(
            "theta trial failures: {}\n",
            self.theta_trial_failures.len()
        ));
        if self.findings.is_empty() {
            out.push_str("findings: none\n");
        } else {
            out.push_str("findings:\n");
            for f in &self.findings {
                out.push_str(&format!("  {f}\n"));
            }
        }
        out
    }
}
