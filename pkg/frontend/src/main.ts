import { ApiClient } from "./api";
import { mountApp } from "./app";
import { SessionStore } from "./store";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? "http://127.0.0.1:8000";

const store = new SessionStore(new ApiClient(baseUrl));
const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");
mountApp(root, store);
