use super::{Anchor, AttributeDef, AttributeId, Catalog, CriterionDef, CriterionId, ReferenceValue, RubricSpec};
use crate::error::Result;

pub const BUILTIN_CATALOG_VERSION: &str = "cryptolib-2021.1";

enum Rule {
    Default,
    Grade,
    Anchors(&'static [(i8, &'static str)]),
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    rule: Rule,
    guidance: &'static str,
}

const fn default(id: &'static str, name: &'static str, guidance: &'static str) -> Criterion {
    Criterion {
        id,
        name,
        rule: Rule::Default,
        guidance,
    }
}

const fn anchors(
    id: &'static str,
    name: &'static str,
    anchors: &'static [(i8, &'static str)],
    guidance: &'static str,
) -> Criterion {
    Criterion {
        id,
        name,
        rule: Rule::Anchors(anchors),
        guidance,
    }
}

const fn grade(id: &'static str, name: &'static str, guidance: &'static str) -> Criterion {
    Criterion {
        id,
        name,
        rule: Rule::Grade,
        guidance,
    }
}

const ATTRIBUTES: &[(u32, &str, &str, &[Criterion])] = &[
    (
        1,
        "Ease of Use",
        "How intuitively the API can be picked up and understood while using it.",
        &[
            default(
                "1a",
                "Readability",
                "Share of API functions taking at most two parameters. Calls with more than three parameters count against the library.",
            ),
            anchors(
                "1b",
                "Default Settings",
                &[
                    (2, "defaults exist and match current BSI recommendations"),
                    (-1, "defaults are missing or insecure"),
                ],
                "Whether cryptographic procedures come with defaults, and whether those defaults are secure by current BSI recommendations.",
            ),
            default(
                "1c",
                "Naming Conventions",
                "Share of the API following one published naming style (for Java e.g. the Google Java Style Guide or the Oracle code conventions).",
            ),
            anchors(
                "1d",
                "Regularity",
                &[
                    (2, "symmetric names wherever applicable"),
                    (0, "symmetric names for central functions"),
                    (-2, "no recognizable naming system"),
                ],
                "Paired operations use symmetric names, e.g. connect()/disconnect().",
            ),
            default(
                "1e",
                "Self-describing function names",
                "Share of function names that are intuitive and state what the function does.",
            ),
        ],
    ),
    (
        2,
        "Scalability",
        "Whether work can run concurrently or in parallel and which data volumes are supported.",
        &[anchors(
            "2a",
            "Concurrency",
            &[
                (2, "parallel use is supported"),
                (0, "parallel use is possible through workarounds such as splitting the input"),
                (-2, "parallel use is not possible"),
            ],
            "Library functions can run in parallel (threads, clusters, load balancers). Inherently sequential steps are ignored.",
        )],
    ),
    (
        3,
        "Testability",
        "How easily code using the API can be tested and debugged, and how errors are surfaced and logged.",
        &[
            anchors(
                "3a",
                "Testability",
                &[
                    (2, "test helpers, default tests or documented test examples are provided"),
                    (-2, "no test helpers or examples are provided"),
                ],
                "The library ships test recommendations such as test classes or test functions.",
            ),
            anchors(
                "3b",
                "Exceptions",
                &[
                    (2, "custom error types with descriptive messages"),
                    (0, "standard error handling"),
                    (-2, "no error handling"),
                ],
                "The library actively handles and reports errors.",
            ),
        ],
    ),
    (
        4,
        "Extendability",
        "Whether functionality can be extended and how much effort such changes take.",
        &[
            anchors(
                "4a",
                "Public",
                &[
                    (2, "everything relevant for extension is public"),
                    (0, "parts of the implementation are public"),
                    (-2, "little or nothing is public"),
                ],
                "Classes and functions needed for extension are public and can be inherited.",
            ),
            anchors(
                "4b",
                "Interfaces",
                &[
                    (2, "interfaces exist for every class meant for users"),
                    (0, "isolated interfaces exist"),
                    (-2, "no interfaces"),
                ],
                "The API is built on interfaces.",
            ),
        ],
    ),
    (
        5,
        "Functional Completeness",
        "Whether the API provides the needed features and stays focused on its purpose.",
        &[anchors(
            "5a",
            "Purposefulness",
            &[
                (2, "only the core mission is covered"),
                (0, "additional useful but unnecessary features"),
                (-2, "unrelated features obscure the purpose"),
            ],
            "The library sticks to its core mission.",
        )],
    ),
    (
        6,
        "Data Types",
        "Which data types are used, whether parameters and return values fit their functions and are ordered consistently.",
        &[
            default(
                "6a",
                "Return values",
                "Share of functions whose return value tells whether they succeeded.",
            ),
            default("6b", "Ordering", "Share of functions with a consistent parameter order."),
        ],
    ),
    (
        7,
        "Code Quality",
        "Whether the code follows standards and conventions.",
        &[
            grade("7a", "Bugs", "Static-analysis grade for bugs; A..E map to +2..-2."),
            grade("7b", "Vulnerability", "Static-analysis grade for vulnerabilities; A..E map to +2..-2."),
            grade("7c", "Code Smell", "Static-analysis grade for code smells; A..E map to +2..-2."),
        ],
    ),
    (
        8,
        "Cost",
        "Fees caused by using the API and the licenses it is offered under.",
        &[
            anchors(
                "8a",
                "Cost",
                &[(2, "free of charge"), (-2, "fee required")],
                "The library can be used without fees.",
            ),
            anchors(
                "8b",
                "Licence",
                &[
                    (2, "unrestricted commercial use"),
                    (0, "free for non-commercial use, or commercial use against payment"),
                    (-2, "no commercial use and payment required"),
                ],
                "The license the library is offered under.",
            ),
        ],
    ),
    (
        9,
        "Requirements",
        "Prerequisites of the API and dependencies that have to be resolved.",
        &[anchors(
            "9a",
            "Dependencies",
            &[
                (2, "dependencies are installed automatically"),
                (-2, "dependencies must be installed by hand"),
            ],
            "Other software, packages or files must be present for the library to work.",
        )],
    ),
    (
        10,
        "Complexity",
        "How complex and configurable the API is and how much repeated boilerplate it demands.",
        &[
            anchors(
                "10a",
                "Atomic Setting",
                &[
                    (2, "settings are preset and can be changed"),
                    (0, "settings are preset and cannot be changed"),
                    (-2, "every parameter must be chosen by hand"),
                ],
                "Fine-grained adjustments are possible.",
            ),
            anchors(
                "10b",
                "Boilerplatecode",
                &[
                    (2, "dedicated methods replace recurring code"),
                    (0, "the largest recurring blocks are simplified"),
                    (-2, "the same code has to be written repeatedly"),
                ],
                "Recurring code developers have to write to use the API.",
            ),
        ],
    ),
    (
        11,
        "Maintained",
        "Whether the API is still developed and whether support is offered.",
        &[
            anchors(
                "11a",
                "Release-frequency",
                &[
                    (2, "fixed release schedule"),
                    (0, "no schedule, but further releases are expected"),
                    (-2, "further releases are uncertain"),
                ],
                "Update and major release cadence over the last three major versions.",
            ),
            anchors(
                "11b",
                "Patch frequency",
                &[
                    (2, "security patches released within 90 days"),
                    (1, "security patches take longer than 90 days"),
                    (0, "unclear whether patches will be provided"),
                    (-2, "no patches are delivered"),
                ],
                "Security issues are fixed quickly.",
            ),
            anchors(
                "11c",
                "Support",
                &[
                    (2, "free official support"),
                    (0, "paid official support only"),
                    (-2, "no official channels"),
                ],
                "An official support channel exists (forum, wiki, mailing list).",
            ),
        ],
    ),
    (
        12,
        "Spread",
        "How widely the API is used, the size of its community and its reputation.",
        &[
            anchors(
                "12a",
                "Successful Stories",
                &[
                    (2, "several reports in reputable trade media"),
                    (0, "no significant mentions"),
                    (-2, "only paid promotional posts"),
                ],
                "Published reports of successful use in other projects.",
            ),
            default(
                "12b",
                "Repositories",
                "Repository popularity (stars or likes) relative to the reference value.",
            ),
        ],
    ),
    (
        13,
        "Performance Impact",
        "How the API affects performance and latency.",
        &[],
    ),
    (
        14,
        "Security",
        "Whether the API and the procedures it uses are secure.",
        &[
            anchors(
                "14a",
                "Standards",
                &[
                    (2, "algorithms meet or exceed the state of the art"),
                    (0, "algorithms meet the standard exactly"),
                    (-2, "some part is obsolete or not considered safe"),
                ],
                "Only algorithms on the supplied whitelist (e.g. BSI TR-02102) are used.",
            ),
            anchors(
                "14b",
                "Certificated",
                &[(2, "multiple certifications"), (0, "one certification"), (-2, "not certified")],
                "The library has been certified.",
            ),
        ],
    ),
    (
        15,
        "Documentation",
        "How thoroughly the API is documented and whether best practices and examples are given.",
        &[
            default("15a", "Function documentation", "Share of functions that are documented."),
            default(
                "15b",
                "Examples",
                "Share of functions with an example of correct use.",
            ),
        ],
    ),
];

pub(super) fn build() -> Result<Catalog> {
    let attributes = ATTRIBUTES
        .iter()
        .map(|&(id, name, description, criteria)| AttributeDef {
            id: AttributeId(id),
            name: name.to_string(),
            description: description.to_string(),
            criteria: criteria.iter().map(|c| criterion(AttributeId(id), c)).collect(),
        })
        .collect();
    Catalog::new(BUILTIN_CATALOG_VERSION, attributes)
}

fn criterion(attribute_id: AttributeId, c: &Criterion) -> CriterionDef {
    let rubric = match c.rule {
        Rule::Default => RubricSpec::default_percentage(),
        Rule::Grade => RubricSpec::grade_scale(),
        // Intermediate values are accepted on every enumerated scale.
        Rule::Anchors(list) => {
            RubricSpec::enumerated(list.iter().map(|&(v, label)| Anchor::new(label, v)).collect(), true)
        }
    };
    let reference = (c.id == "12b").then(|| ReferenceValue {
        description: "stars of the most popular English-language Java repository on GitHub (Mindustry)".into(),
        value: 7557,
        as_of: "2020-12".into(),
    });
    CriterionDef {
        id: CriterionId(c.id.to_string()),
        name: c.name.to_string(),
        attribute_id,
        rubric,
        guidance: c.guidance.to_string(),
        reference,
    }
}
