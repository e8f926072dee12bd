//! Configure the HTTP chat client and the NER/NLI sidecar client.
//!
//! Without arguments this only shows the configuration checks. With
//! `OPENAI_API_KEY` set and `--live` passed it makes one real chat call;
//! with `--sidecar URL` it sends one `/ner` and one `/nli` request.

use std::sync::Arc;

use utiljudge::clients::{
    ChatClient, EntityRecognizer, HttpChat, HttpChatConfig, HttpSidecar, LabelMap, NliModel, RetryPolicy,
};

pub fn run_example() -> utiljudge::Result<()> {
    let args: Vec<String> = std::env::args().collect();

    let missing = HttpChatConfig { api_key_env: Some("UTILJUDGE_EXAMPLE_NO_SUCH_KEY".into()), ..Default::default() };
    match HttpChat::new(&missing) {
        Err(e) => println!("as expected: {e}"),
        Ok(_) => println!("key unexpectedly present"),
    }

    if args.iter().any(|a| a == "--live") {
        let chat = HttpChat::new(&HttpChatConfig::default())?;
        let client = ChatClient::new(Arc::new(chat), "gpt-3.5-turbo").with_retry(RetryPolicy::default());
        println!("{}", client.complete_text("Reply with the single word: ready", 0.0)?);
        println!("{}", client.log().to_jsonl());
    }

    if let Some(i) = args.iter().position(|a| a == "--sidecar") {
        let url = args.get(i + 1).cloned().unwrap_or_else(|| "http://127.0.0.1:8080".into());
        let sidecar = HttpSidecar::new(url, LabelMap::default())?;
        println!("{:?}", sidecar.ner("Marie Curie moved to Paris in 1891.")?);
        println!("{:?}", sidecar.nli("X was born in 1987.", "X was born in 1990.")?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("example failed");
}
