//! Built-in example diagrams: the SIR epidemic, a vaccination module, the
//! smoking causal loop diagrams and a smoking-by-age stratification setup.

use crate::compose::{compose_open, correspondence_by_name, OpenDiagram};
use crate::cset::{CSetInstance, Operator, PartId, Sign};
use crate::error::Result;
use crate::model::{Model, NamedComponents};
use crate::ode::Scenario;
use crate::schemas::{build_cld, interface_sfd, DiagramKind, SfdSpec};

use Operator::{Div, Mul};

/// Susceptible / infected / recovered with frequency-dependent infection.
pub fn sir_sfd() -> CSetInstance {
    SfdSpec::new()
        .stocks(&["S", "I", "R"])
        .sum_var("N", &["S", "I", "R"])
        .params(&["c", "beta", "tRec"])
        .aux("v_prevalence", Div, &["I", "N"])
        .aux("v_meanInfectiousContactsPerS", Mul, &["c", "v_prevalence"])
        .aux("v_forceOfInfection", Mul, &["v_meanInfectiousContactsPerS", "beta"])
        .aux("v_newInfections", Mul, &["S", "v_forceOfInfection"])
        .aux("v_newRecovery", Div, &["I", "tRec"])
        .flow("inf", "v_newInfections", Some("S"), Some("I"))
        .flow("rec", "v_newRecovery", Some("I"), Some("R"))
        .build()
        .expect("SIR diagram is well formed")
}

pub fn sir_scenario() -> Scenario {
    Scenario::new(0.0, 100.0, 0.1)
        .stock("S", 990.0)
        .stock("I", 10.0)
        .stock("R", 0.0)
        .param("c", 10.0)
        .param("beta", 0.05)
        .param("tRec", 5.0)
}

/// Vaccination with waning immunity between `S` and `V`.
pub fn vaccination_sfd() -> CSetInstance {
    SfdSpec::new()
        .stocks(&["S", "V"])
        .sum_var("N", &["S", "V"])
        .params(&["rv", "tw"])
        .aux("v_vaccination", Mul, &["S", "rv"])
        .aux("v_waning", Div, &["V", "tw"])
        .flow("vaccination", "v_vaccination", Some("S"), Some("V"))
        .flow("waning", "v_waning", Some("V"), Some("S"))
        .build()
        .expect("vaccination diagram is well formed")
}

pub fn sirv_scenario() -> Scenario {
    sir_scenario()
        .stock("V", 0.0)
        .param("rv", 0.01)
        .param("tw", 180.0)
}

/// Open SFD exposing stock `S`, sum variable `N` and the link between them.
pub fn open_on_s_and_n(sfd: CSetInstance) -> Result<OpenDiagram> {
    let s = sfd.find_by_name("sname", "S").expect("diagram has a stock S");
    let n = sfd.find_by_name("svname", "N").expect("diagram has a sum variable N");
    let mut open = OpenDiagram::closed(sfd, interface_sfd())?;
    open.add_induced_foot(&[PartId::new("S", s), PartId::new("SV", n)])?;
    Ok(open)
}

pub fn sir_open() -> OpenDiagram {
    open_on_s_and_n(sir_sfd()).expect("SIR foot is valid")
}

pub fn vaccination_open() -> OpenDiagram {
    open_on_s_and_n(vaccination_sfd()).expect("vaccination foot is valid")
}

/// SIR glued to the vaccination module along `S`, `N` and `S → N`.
pub fn sirv() -> Result<(OpenDiagram, Vec<String>)> {
    let l = sir_open();
    let r = vaccination_open();
    let corr = correspondence_by_name(&l.feet[0], &r.feet[0])?;
    compose_open(&l, &r, 0, 0, &corr)
}

/// `X → Y` drained at rate `X / t`.
pub fn first_order_delay() -> CSetInstance {
    SfdSpec::new()
        .stocks(&["X", "Y"])
        .params(&["t"])
        .aux("v", Div, &["X", "t"])
        .flow("f", "v", Some("X"), Some("Y"))
        .build()
        .expect("delay pattern is well formed")
}

pub fn smoking_cld() -> CSetInstance {
    build_cld(
        &["NA", "Smoking", "Health", "CommitmentToCessation"],
        &[
            ("NA", "Smoking", Sign::Pos),
            ("Smoking", "NA", Sign::Pos),
            ("Smoking", "Health", Sign::Neg),
            ("Health", "CommitmentToCessation", Sign::Neg),
            ("CommitmentToCessation", "Smoking", Sign::Neg),
        ],
    )
    .expect("smoking CLD is well formed")
}

/// Three positive links closing a single loop through nicotine level.
pub fn elaborate_smoking_cld() -> CSetInstance {
    build_cld(
        &["NA2", "Smoking2", "NicotineLevelInBody"],
        &[
            ("NA2", "Smoking2", Sign::Pos),
            ("Smoking2", "NicotineLevelInBody", Sign::Pos),
            ("NicotineLevelInBody", "NA2", Sign::Pos),
        ],
    )
    .expect("elaborate smoking CLD is well formed")
}

/// Two variables reinforcing each other.
pub fn reinforcing_pattern() -> CSetInstance {
    build_cld(&["NA", "Smoking"], &[("NA", "Smoking", Sign::Pos), ("Smoking", "NA", Sign::Pos)])
        .expect("pattern is well formed")
}

/// Type diagram for stratification: one population stock summed into `N`,
/// with a behaviour flow `pop * p_beh` and an aging flow `pop / p_age`, both
/// looping on the stock.
pub fn stratification_type() -> CSetInstance {
    SfdSpec::new()
        .stocks(&["pop"])
        .sum_var("N", &["pop"])
        .params(&["p_beh", "p_age"])
        .aux("v_beh", Mul, &["pop", "p_beh"])
        .aux("v_age", Div, &["pop", "p_age"])
        .flow("f_beh", "v_beh", Some("pop"), Some("pop"))
        .flow("f_age", "v_age", Some("pop"), Some("pop"))
        .build()
        .expect("type diagram is well formed")
}

/// Never / current / former smokers with initiation, cessation and relapse,
/// plus an aging placeholder flow on each stock.
pub fn smoking_aggregate() -> CSetInstance {
    SfdSpec::new()
        .stocks(&["NS", "CS", "FS"])
        .sum_var("N", &["NS", "CS", "FS"])
        .params(&["p_init", "p_cess", "p_rel", "p_age"])
        .aux("v_init", Mul, &["NS", "p_init"])
        .aux("v_cess", Mul, &["CS", "p_cess"])
        .aux("v_rel", Mul, &["FS", "p_rel"])
        .aux("v_age_NS", Div, &["NS", "p_age"])
        .aux("v_age_CS", Div, &["CS", "p_age"])
        .aux("v_age_FS", Div, &["FS", "p_age"])
        .flow("init", "v_init", Some("NS"), Some("CS"))
        .flow("cess", "v_cess", Some("CS"), Some("FS"))
        .flow("rel", "v_rel", Some("FS"), Some("CS"))
        .flow("age_NS", "v_age_NS", Some("NS"), Some("NS"))
        .flow("age_CS", "v_age_CS", Some("CS"), Some("CS"))
        .flow("age_FS", "v_age_FS", Some("FS"), Some("FS"))
        .build()
        .expect("aggregate diagram is well formed")
}

/// Child / adult / senior strata with aging between them and a behaviour
/// placeholder flow on each stratum.
pub fn age_strata() -> CSetInstance {
    SfdSpec::new()
        .stocks(&["child", "adult", "senior"])
        .sum_var("N", &["child", "adult", "senior"])
        .params(&["r_child", "r_adult", "r_senior", "d_child", "d_adult"])
        .aux("v_beh_child", Mul, &["child", "r_child"])
        .aux("v_beh_adult", Mul, &["adult", "r_adult"])
        .aux("v_beh_senior", Mul, &["senior", "r_senior"])
        .aux("v_aging_child", Div, &["child", "d_child"])
        .aux("v_aging_adult", Div, &["adult", "d_adult"])
        .flow("beh_child", "v_beh_child", Some("child"), Some("child"))
        .flow("beh_adult", "v_beh_adult", Some("adult"), Some("adult"))
        .flow("beh_senior", "v_beh_senior", Some("senior"), Some("senior"))
        .flow("aging_child", "v_aging_child", Some("child"), Some("adult"))
        .flow("aging_adult", "v_aging_adult", Some("adult"), Some("senior"))
        .build()
        .expect("strata diagram is well formed")
}

/// Every built-in model under the file stem used by `catflow example`.
pub fn catalog() -> Result<Vec<(&'static str, Model)>> {
    let (sirv, _) = sirv()?;
    let sfd = |d| Model::Diagram(DiagramKind::Sfd, d);
    let cld = |d| Model::Diagram(DiagramKind::Cld, d);
    let agg_typing = crate::stratify::TypedDiagram::auto(smoking_aggregate(), stratification_type())?;
    Ok(vec![
        ("sir", sfd(sir_sfd())),
        ("sir-scenario", Model::Scenario(sir_scenario())),
        ("vaccination", sfd(vaccination_sfd())),
        ("sir-open", Model::Open(DiagramKind::Sfd, sir_open())),
        ("vaccination-open", Model::Open(DiagramKind::Sfd, vaccination_open())),
        ("sirv", Model::Open(DiagramKind::Sfd, sirv)),
        ("sirv-scenario", Model::Scenario(sirv_scenario())),
        ("delay-pattern", sfd(first_order_delay())),
        ("smoking-cld", cld(smoking_cld())),
        ("smoking-elaborate-cld", cld(elaborate_smoking_cld())),
        ("reinforcing-pattern", cld(reinforcing_pattern())),
        ("strat-type", sfd(stratification_type())),
        ("smoking-aggregate", sfd(smoking_aggregate())),
        ("age-strata", sfd(age_strata())),
        (
            "smoking-aggregate-typing",
            Model::Typing(NamedComponents::of(&agg_typing.typing, agg_typing.diagram.schema())),
        ),
    ])
}
