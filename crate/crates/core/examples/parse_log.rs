//! Parses a raw log, segments it into services and prints each record.

use anchorscope::event_log::{aggregate_operations, parse_log_str, segment_services, LogGrammar, OperationCatalog};

const LOG: &str = "\
1620000000000 REQ7 BEGIN_SERVICE agent=a1 client=c9
1620000004000 REQ7 QUEUE_CALL
1620000031000 REQ7 SCAN_ID
1620000052000 REQ7 CHECK_RECORD
1620000075000 REQ7 UPLOAD_DOC
1620000090000 REQ7 REVIEW_FORM
1620000101000 REQ7 UPLOAD_DOC
1620000130000 REQ7 REVIEW_FORM
1620000150000 REQ7 EXEC_TXN
1620000170000 REQ7 PAY_INIT
1620000178000 REQ7 PAY_CONFIRM
1620000190000 REQ7 PRINT_RECEIPT
1620000200000 REQ7 END_SERVICE
1620000201000 REQ8 QUEUE_CALL
not a log line
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grammar = LogGrammar::default();
    let catalog = OperationCatalog::default();
    let parsed = parse_log_str(LOG, &grammar)?;
    for d in &parsed.diagnostics {
        println!("parse diagnostic: {d:?}");
    }
    let seg = segment_services(&parsed.entries, &grammar);
    for d in &seg.diagnostics {
        println!("segmentation diagnostic: {d:?}");
    }
    for session in &seg.sessions {
        let record = aggregate_operations(session, &catalog)?;
        println!("{} agent={} client={}", session.service_id, session.agent_id, session.client_id);
        for run in &record.items {
            println!("  {:<10} x{} {:>6.1}s", run.operation, run.count, run.duration_s());
        }
    }
    Ok(())
}
