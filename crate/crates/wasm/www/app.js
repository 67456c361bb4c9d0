import init, { films, panel, explainLink, similarityProfile } from "./pkg/drec_wasm.js";

const FACETS = ["filming_person", "filmed_person", "filmed_situation",
                "filmic_materials", "filmic_text", "audience"];
const $ = (id) => document.getElementById(id);
let titles = {};

function weights() {
  const facet_weights = {};
  for (const f of FACETS) facet_weights[f] = Number($(`w-${f}`).value);
  return JSON.stringify({ ancestor_decay: Number($("decay").value), facet_weights });
}

function show(err) {
  $("error").textContent = err ? String(err.message || err) : "";
}

function renderExplain(other) {
  try {
    const e = JSON.parse(explainLink($("film").value, other, weights()));
    const box = $("explain");
    box.innerHTML = "";
    const head = document.createElement("p");
    head.textContent = `${titles[other]}: score ${e.score}`;
    box.append(head);
    if (e.shared.length === 0) {
      box.append("No shared descriptors.");
      return;
    }
    const dl = document.createElement("dl");
    for (const c of e.shared) {
      const dt = document.createElement("dt");
      dt.textContent = `${c.label} (${c.facet})`;
      const dd = document.createElement("dd");
      dd.textContent = c.definition;
      dl.append(dt, dd);
    }
    box.append(dl);
    show();
  } catch (err) { show(err); }
}

function render() {
  const film = $("film").value;
  const unblind = $("unblind").checked;
  $("decay-value").textContent = $("decay").value;
  try {
    const p = JSON.parse(panel(film, 4, weights(), unblind));
    const ol = $("panel");
    ol.innerHTML = "";
    for (const id of p.presented) {
      const li = document.createElement("li");
      li.textContent = titles[id];
      if (unblind && id === p.control) {
        li.classList.add("control");
        li.textContent += " [control]";
      }
      li.onclick = () => renderExplain(id);
      ol.append(li);
    }
    const rows = JSON.parse(similarityProfile(film, weights()));
    const table = $("profile");
    table.innerHTML = "";
    for (const r of rows) {
      const tr = table.insertRow();
      tr.insertCell().textContent = r.title;
      tr.insertCell().textContent = r.score.toFixed(3);
      tr.insertCell().textContent = `${r.shared} shared`;
      const bar = document.createElement("span");
      bar.className = "bar";
      bar.style.width = `${Math.round(r.score * 200)}px`;
      tr.insertCell().append(bar);
    }
    show();
  } catch (err) { show(err); }
}

async function main() {
  await init();
  const list = JSON.parse(films());
  for (const f of list) {
    titles[f.id] = f.title;
    const opt = document.createElement("option");
    opt.value = f.id;
    opt.textContent = `${f.title} (${f.director}, ${f.year})`;
    $("film").append(opt);
  }
  $("film").value = "lift-isaacs-2001";
  for (const f of FACETS) {
    const label = document.createElement("label");
    label.htmlFor = `w-${f}`;
    label.textContent = f.replace("_", " ");
    const input = document.createElement("input");
    Object.assign(input, { type: "range", id: `w-${f}`, min: "0.1", max: "4", step: "0.1", value: "1" });
    input.oninput = render;
    $("facets").append(label, input);
  }
  $("film").onchange = render;
  $("unblind").onchange = render;
  $("decay").oninput = render;
  render();
}

main().catch(show);
