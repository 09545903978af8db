import {
  ApiError,
  DomainInfo,
  GraphStats,
  SEARCH_LIMIT,
  SearchResult,
  fetchDomains,
  fetchGraphStats,
  search,
} from "./api.js";

// The Go control is added and removed from the document rather than
// hidden: with no domain checked it must not exist on the page, and a
// search can never be dispatched without one.

export async function initApp(root: HTMLElement, base = ""): Promise<void> {
  root.innerHTML = `
    <h1>ontocrawl search</h1>
    <p data-error hidden></p>
    <section data-stats class="stats"></section>
    <form data-search-form>
      <label>Query
        <input data-query type="text" name="query" autocomplete="off">
      </label>
      <span data-validation class="validation"></span>
      <fieldset data-domains>
        <legend>Domains</legend>
      </fieldset>
      <span data-go-slot></span>
    </form>
    <ol data-results class="results"></ol>
  `;
  root.dataset.status = "idle";

  const errorBanner = root.querySelector("[data-error]") as HTMLElement;
  const statsPanel = root.querySelector("[data-stats]") as HTMLElement;
  const form = root.querySelector("[data-search-form]") as HTMLFormElement;
  const queryInput = root.querySelector("[data-query]") as HTMLInputElement;
  const validation = root.querySelector("[data-validation]") as HTMLElement;
  const domainBox = root.querySelector("[data-domains]") as HTMLElement;
  const goSlot = root.querySelector("[data-go-slot]") as HTMLElement;
  const resultList = root.querySelector("[data-results]") as HTMLElement;

  let domains: DomainInfo[] = [];
  let inflight: AbortController | null = null;

  const showError = (message: string) => {
    errorBanner.textContent = message;
    errorBanner.hidden = false;
  };
  const clearError = () => {
    errorBanner.textContent = "";
    errorBanner.hidden = true;
  };

  const checkedNames = (): string[] =>
    Array.from(
      domainBox.querySelectorAll<HTMLInputElement>("input[type=checkbox]")
    )
      .filter((box) => box.checked)
      .map((box) => box.value);

  const syncGoButton = () => {
    const existing = goSlot.querySelector("[data-go]");
    if (checkedNames().length === 0) {
      existing?.remove();
      return;
    }
    if (!existing) {
      const go = document.createElement("button");
      go.type = "submit";
      go.textContent = "Go";
      go.setAttribute("data-go", "");
      goSlot.append(go);
    }
  };

  const renderCheckboxes = () => {
    for (const domain of domains) {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.value = domain.name;
      box.addEventListener("change", syncGoButton);
      label.append(box, ` ${domain.name}`);
      domainBox.append(label);
    }
  };

  const renderStats = (stats: GraphStats) => {
    const perDomain = stats.domain_names
      .map((name, i) => `${name} ${stats.per_domain[i]}`)
      .join(", ");
    statsPanel.textContent =
      `${stats.m} pages stored (${perDomain}); ` +
      `${stats.space} relevant to every domain (edge weight ${stats.space_edge_weight})`;
  };

  const renderResults = (results: SearchResult[], selected: string[]) => {
    resultList.innerHTML = "";
    if (results.length === 0) {
      const empty = document.createElement("li");
      empty.textContent = "no matches";
      resultList.append(empty);
      return;
    }
    // rows keep the API's order exactly, no client-side re-sort
    for (const result of results) {
      const row = document.createElement("li");
      const link = document.createElement("a");
      link.href = result.url;
      link.textContent = result.url;
      const score = document.createElement("span");
      score.className = "score";
      const perDomain = selected
        .filter((name) => name in result.per_domain_scores)
        .map((name) => `${name} ${result.per_domain_scores[name].score}`)
        .join(", ");
      score.textContent = ` score ${result.match_score}, ${result.hits} hits (${perDomain})`;
      const snippet = document.createElement("p");
      snippet.className = "snippet";
      snippet.textContent = result.snippet;
      row.append(link, score, snippet);
      resultList.append(row);
    }
  };

  const submit = async () => {
    validation.textContent = "";
    const query = queryInput.value.trim();
    const selected = checkedNames();
    if (selected.length === 0) {
      // unreachable through the UI, the Go control does not exist then
      return;
    }
    if (query === "") {
      validation.textContent = "enter a query first";
      return;
    }
    inflight?.abort();
    const controller = new AbortController();
    inflight = controller;
    root.dataset.status = "loading";
    try {
      const response = await search(
        base,
        { query, domains: selected, semantics: "intersect", limit: SEARCH_LIMIT },
        controller.signal
      );
      if (inflight !== controller) return; // a newer search owns the screen
      clearError();
      renderResults(response.results, selected);
      root.dataset.status = "done";
    } catch (err) {
      if ((err as Error)?.name === "AbortError") return;
      if (inflight !== controller) return;
      // inputs stay as they were so the search can be refined
      showError(
        err instanceof ApiError ? err.message : "search failed, try again"
      );
      root.dataset.status = "error";
    }
  };

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void submit();
  });

  try {
    domains = await fetchDomains(base);
    renderCheckboxes();
    syncGoButton();
  } catch (err) {
    showError(
      err instanceof ApiError ? err.message : "cannot reach the search service"
    );
    return;
  }
  try {
    renderStats(await fetchGraphStats(base));
  } catch {
    statsPanel.textContent = "graph stats unavailable";
  }
}
