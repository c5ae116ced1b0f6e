use serde_json::{json, Value};

fn op(summary: &str, body: Option<&str>, response: &str) -> Value {
    let mut v = json!({
        "summary": summary,
        "responses": { "200": { "description": response } },
    });
    if let Some(b) = body {
        v["requestBody"] = json!({ "description": b, "content": { "application/json": {} } });
    }
    v
}

/// OpenAPI-style description of the routes.
pub fn api_description() -> Value {
    let id = json!([{ "name": "id", "in": "path", "required": true, "schema": { "type": "string" } }]);
    json!({
        "openapi": "3.0.3",
        "info": {
            "title": "ILC box discovery",
            "version": env!("CARGO_PKG_VERSION"),
            "description": "Sessions for interactive discovery of class-pure boxes on inline-coordinate graphs. \
                Mutating calls bump the session version; accept requires the version the candidate list was produced at \
                and answers 409 when it is stale.",
        },
        "paths": {
            "/api/v1/sessions": {
                "get": op("List session ids", None, "array of ids"),
                "post": op(
                    "Create a session",
                    Some("one of {csv, path, dataset} (or none to use the server default), optional options (CSV layout), mode, config"),
                    "201 with the session summary",
                ),
            },
            "/api/v1/sessions/{id}": {
                "parameters": id,
                "get": op("Session summary", None, "version, sizes, config"),
                "delete": op("Drop a session", None, "204"),
            },
            "/api/v1/sessions/{id}/plot": {
                "parameters": id,
                "get": op("SVG plot of the active cases with accepted boxes; query mirrored, all, overlay=x1,x2,y1,y2;...", None, "image/svg+xml"),
            },
            "/api/v1/sessions/{id}/candidates": {
                "parameters": id,
                "get": op("Ranked candidate boxes with stats; query limit", None, "{version, phase, turn, items}"),
            },
            "/api/v1/sessions/{id}/accept": {
                "parameters": id,
                "post": op("Accept a candidate or a box", Some("{token, candidate} or {token, box: {id, x1, x2, y1, y2}}"), "step, version, ruleset, metrics; 409 on stale token; 422 on invalid box"),
            },
            "/api/v1/sessions/{id}/undo": {
                "parameters": id,
                "post": op("Undo the last mutation", None, "undone, version, ruleset, metrics"),
            },
            "/api/v1/sessions/{id}/auto-complete": {
                "parameters": id,
                "post": op("Accept top candidates until done", None, "added, version, ruleset, metrics"),
            },
            "/api/v1/sessions/{id}/join": {
                "parameters": id,
                "post": op("Join rules without changing any prediction", None, "steps, version, ruleset, metrics"),
            },
            "/api/v1/sessions/{id}/prune": {
                "parameters": id,
                "post": op("Reassign or refuse mini rules", Some("{strategy: reassign|refuse, rule?, tau?}"), "pruned, version, ruleset, metrics"),
            },
            "/api/v1/sessions/{id}/prune/{rule}": {
                "get": op("What pruning a rule would do", None, "counts, new target, errors"),
            },
            "/api/v1/sessions/{id}/metrics": { "parameters": id, "get": op("Rule metrics on the session data", None, "metrics") },
            "/api/v1/sessions/{id}/ruleset": {
                "parameters": id,
                "get": op("Current rules", None, "rules with readable text"),
                "put": op("Import a rules file", Some("JSON lines as written by the command line tools"), "version, ruleset, metrics"),
            },
            "/api/v1/sessions/{id}/trace": { "parameters": id, "get": op("Accepted boxes in order", None, "trace") },
            "/api/v1/sessions/{id}/classify": {
                "parameters": id,
                "post": op("Classify new points", Some("{points: [[x1, ..., xn], ...]}"), "array of {class, refused, fired}"),
            },
            "/api/v1/sessions/{id}/export/{what}": {
                "get": op("Download ruleset, trace or predictions as JSON lines", None, "application/x-ndjson"),
            },
            "/api/v1/spec": { "get": op("This document", None, "JSON") },
        }
    })
}
